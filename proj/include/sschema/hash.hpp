#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>

namespace sschema {

inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ULL;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

// FNV-1a, the stable 64-bit hash used for surrogate seeds and digests.
inline std::uint64_t fnv1a64_bytes(const void* data, std::size_t len,
                                   std::uint64_t h = kFnvOffset) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= kFnvPrime;
    }
    return h;
}

inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = kFnvOffset) {
    return fnv1a64_bytes(s.data(), s.size(), h);
}

std::string hex64(std::uint64_t value);

}  // namespace sschema
