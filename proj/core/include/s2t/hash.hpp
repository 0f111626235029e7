#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace s2t {

// 64-bit FNV-1a. Stable across runs and platforms; not cryptographic.
std::uint64_t fnv1a64(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

// Lower-case, zero-padded 16 character hex rendering of a 64-bit value.
std::string hex64(std::uint64_t value);

inline std::string text_hash(std::string_view data) { return hex64(fnv1a64(data)); }

}  // namespace s2t
