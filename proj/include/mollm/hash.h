//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_HASH_H_
#define MOLLM_HASH_H_

#include <cstdint>
#include <span>
#include <string_view>

namespace mollm {

/// Published seed for every hash in the toolkit.
inline constexpr std::uint64_t kHashSeed = 0x6d6f6c6c6d2d7631ULL;  // "mollm-v1"

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  return mix64(h ^ mix64(v));
}

inline std::uint64_t hash_words(std::span<const std::int64_t> words,
                                std::uint64_t seed = kHashSeed) {
  std::uint64_t h = mix64(seed ^ words.size());
  for (std::int64_t w: words) h = hash_combine(h, static_cast<std::uint64_t>(w));
  return h;
}

inline std::uint64_t hash_string(std::string_view s, std::uint64_t seed = kHashSeed) {
  std::uint64_t h = mix64(seed ^ s.size());
  for (unsigned char c: s) h = hash_combine(h, c);
  return h;
}

}  // namespace mollm

#endif  // MOLLM_HASH_H_
