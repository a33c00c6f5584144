#include "thoughtmem/metrics.hpp"

#include "thoughtmem/errors.hpp"
#include "thoughtmem/text.hpp"

#include <algorithm>
#include <vector>

namespace thoughtmem {

CoverageResult coverage(const std::set<std::string>& retrieved_item_ids,
                        const std::set<std::string>& gold_chunk_ids,
                        const MemoryStore& store) {
    if (gold_chunk_ids.empty()) {
        throw Error(ErrorCode::empty_gold_set, "gold chunk set is empty");
    }
    if (retrieved_item_ids.empty()) {
        throw Error(ErrorCode::empty_retrieved_set, "precision is undefined for an empty set");
    }
    CoverageResult result;
    result.gold_chunks = gold_chunk_ids;
    for (const auto& id : retrieved_item_ids) {
        auto roots = store.root_source(id);
        result.mapped_chunks.insert(roots.begin(), roots.end());
    }
    std::size_t hits = 0;
    for (const auto& id : result.mapped_chunks) {
        hits += gold_chunk_ids.count(id);
    }
    result.precision = static_cast<double>(hits) / static_cast<double>(result.mapped_chunks.size());
    result.recall = static_cast<double>(hits) / static_cast<double>(gold_chunk_ids.size());
    result.f1 = (result.precision + result.recall) == 0.0
                    ? 0.0
                    : 2.0 * result.precision * result.recall /
                          (result.precision + result.recall);
    return result;
}

namespace {

std::vector<std::string> lowercased_tokens(const std::string& text) {
    auto tokens = tokenize(text);
    for (auto& token : tokens) token = ascii_lower(token);
    return tokens;
}

// LCS length with a rolling row; O(m*n) time, O(min) memory.
std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
    const auto& shorter = a.size() <= b.size() ? a : b;
    const auto& longer = a.size() <= b.size() ? b : a;
    std::vector<std::size_t> prev(shorter.size() + 1, 0);
    std::vector<std::size_t> curr(shorter.size() + 1, 0);
    for (std::size_t i = 1; i <= longer.size(); ++i) {
        for (std::size_t j = 1; j <= shorter.size(); ++j) {
            curr[j] = longer[i - 1] == shorter[j - 1] ? prev[j - 1] + 1
                                                      : std::max(prev[j], curr[j - 1]);
        }
        std::swap(prev, curr);
    }
    return prev[shorter.size()];
}

} // namespace

double rouge_l_f1(const std::string& candidate, const std::string& reference) {
    const auto reference_tokens = lowercased_tokens(reference);
    if (reference_tokens.empty()) {
        throw Error(ErrorCode::empty_reference, "reference has no tokens");
    }
    const auto candidate_tokens = lowercased_tokens(candidate);
    const std::size_t lcs = lcs_length(candidate_tokens, reference_tokens);
    if (lcs == 0) return 0.0;
    const double precision = static_cast<double>(lcs) / static_cast<double>(candidate_tokens.size());
    const double recall = static_cast<double>(lcs) / static_cast<double>(reference_tokens.size());
    return 2.0 * precision * recall / (precision + recall);
}

} // namespace thoughtmem
