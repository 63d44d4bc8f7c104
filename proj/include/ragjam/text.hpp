#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ragjam {

// FNV-1a 64-bit. Stable across platforms; used for embedding buckets,
// cache keys and config fingerprints.
inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

std::string trim(std::string_view s);
std::string lowercase(std::string_view s);

// Lowercase and split on non-alphanumeric characters; drops empty pieces.
std::vector<std::string> tokenize_alnum(std::string_view text);

// Whitespace split, case preserved.
std::vector<std::string> tokenize_ws(std::string_view text);

bool contains_ci(std::string_view haystack, std::string_view needle);

}  // namespace ragjam
