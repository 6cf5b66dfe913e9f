#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace qsn {

// FNV-1a, 64 bit. Used to fingerprint configs and learned-rate vectors so
// runs can be matched across files without storing the full payload.
inline uint64_t fnv1a64(const void* data, size_t len,
                        uint64_t h = 14695981039346656037ull) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  return h;
}

inline uint64_t fnv1a64(std::string_view s, uint64_t h = 14695981039346656037ull) {
  return fnv1a64(s.data(), s.size(), h);
}

inline uint64_t fnv1a64(std::span<const double> v,
                        uint64_t h = 14695981039346656037ull) {
  return fnv1a64(v.data(), v.size() * sizeof(double), h);
}

}  // namespace qsn
