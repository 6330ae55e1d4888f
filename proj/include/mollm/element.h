//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_ELEMENT_H_
#define MOLLM_ELEMENT_H_

#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace mollm {

inline constexpr int kMaxAtomicNumber = 118;

/// Atomic number for a case-sensitive element symbol ("C", "Cl", ...).
std::optional<int> atomic_number(std::string_view symbol);

/// Symbol for an atomic number in [1, 118]; empty view otherwise.
std::string_view element_symbol(int z);

/// True for B, C, N, O, P, S, F, Cl, Br, I: the atoms SMILES may write
/// without brackets.
bool is_organic_subset(int z);

/// Elements that may be written as lowercase aromatic atoms.
bool may_be_aromatic(int z);

/// Allowed total valences (bond orders + hydrogens) for an element with the
/// given formal charge, in increasing order.
///
/// Charged atoms use the valences of the isoelectronic neutral element in the
/// same period (N+ behaves like C, O- like F, ...). Elements outside the
/// main-group table (metals, noble gases) have no rule and return
/// std::nullopt; valence checks skip them.
std::optional<std::vector<int>> allowed_valences(int z, int charge);

/// Largest allowed valence, or std::nullopt when the element has no rule.
std::optional<int> max_valence(int z, int charge);

/// Smallest allowed valence >= used, or std::nullopt if none fits.
std::optional<int> fill_valence(int z, int charge, int used);

}  // namespace mollm

#endif  // MOLLM_ELEMENT_H_
