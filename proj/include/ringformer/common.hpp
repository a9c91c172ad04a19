#pragma once

#include <cstdint>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ringformer {

inline constexpr const char* kToolVersion = "0.1.0";

// Error taxonomy mapped to CLI exit codes: parse/validation -> 3, numerical -> 4.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// FNV-1a, used for graph/cache fingerprints.
inline std::uint64_t fnv1a64(const void* data, std::size_t n,
                             std::uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a64_u64(std::uint64_t v, std::uint64_t h) {
    return fnv1a64(&v, sizeof(v), h);
}

inline std::uint64_t fnv1a64_str(const std::string& s, std::uint64_t h) {
    return fnv1a64(s.data(), s.size(), h);
}

template <typename T>
std::uint64_t fnv1a64_vec(const std::vector<T>& v, std::uint64_t h) {
    static_assert(std::is_trivially_copyable_v<T>);
    return fnv1a64(v.data(), v.size() * sizeof(T), h);
}

}  // namespace ringformer
