//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_FINGERPRINT_H_
#define MOLLM_FINGERPRINT_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mollm/molgraph.h"

namespace mollm {

inline constexpr int kDefaultFingerprintWidth = 2048;

/// Fixed-width bit vector.
class Fingerprint {
public:
  Fingerprint() = default;
  explicit Fingerprint(int width);

  int width() const { return width_; }
  bool test(int bit) const;
  void set(int bit);
  int count() const;
  std::vector<int> on_bits() const;

  /// "width:hex", bytes in increasing bit order, bit 0 the low bit of the
  /// first byte.
  std::string to_hex() const;
  static Fingerprint from_hex(std::string_view text);

  bool operator==(const Fingerprint &other) const = default;

private:
  friend double tanimoto(const Fingerprint &a, const Fingerprint &b);

  int width_ = 0;
  std::vector<std::uint64_t> words_;
};

/// Circular fingerprint. Atom invariants (element, heavy degree, hydrogens,
/// charge, ring membership, aromaticity) are hashed and refined radius
/// times from sorted (bond order, neighbour identifier) lists; every
/// identifier at every radius sets one bit.
Fingerprint morgan(const MolGraph &g, int radius = 2,
                   int width = kDefaultFingerprintWidth);

/// Hashes every simple path of min_len..max_len bonds, read in the
/// direction giving the smaller label sequence. Requires
/// 1 <= min_len <= max_len <= 7.
Fingerprint path_fp(const MolGraph &g, int min_len = 1, int max_len = 7,
                    int width = kDefaultFingerprintWidth);

/// |a & b| / |a | b|; 1.0 when both are empty. Throws std::invalid_argument
/// on width mismatch.
double tanimoto(const Fingerprint &a, const Fingerprint &b);

}  // namespace mollm

#endif  // MOLLM_FINGERPRINT_H_
