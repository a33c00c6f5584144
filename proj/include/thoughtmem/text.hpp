#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace thoughtmem {

// A token is a maximal run of non-whitespace bytes. This is the one token
// unit used for chunk budgets, context budgets, and ROUGE-L alike.
std::vector<std::string> tokenize(std::string_view text);

std::size_t token_count(std::string_view text);

// ASCII-only lowercasing; non-ASCII bytes pass through untouched.
std::string ascii_lower(std::string_view text);

std::string join_tokens(const std::vector<std::string>& tokens,
                        std::size_t first, std::size_t count);

std::string trim(std::string_view text);

} // namespace thoughtmem
