#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace thoughtmem {

// SHA-256 hex digest; used for content-addressed chunk ids and store
// checksums.
std::string sha256_hex(std::string_view data);

// FNV-1a 64-bit; stable across platforms, used for embedding buckets.
std::uint64_t fnv1a64(std::string_view data);

} // namespace thoughtmem
