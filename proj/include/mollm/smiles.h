//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_SMILES_H_
#define MOLLM_SMILES_H_

#include <span>
#include <string>
#include <string_view>

#include "mollm/molgraph.h"

namespace mollm {

/// Parses a SMILES string into a resolved graph.
///
/// Supports the organic subset, bracket atoms (isotope and chirality are
/// read and dropped), bond symbols - = # : / \ (directional bonds become
/// single), branches, ring closures (digits and %nn) and '.' fragments.
/// Errors carry the character offset where parsing stopped.
MolGraph parse_smiles(std::string_view text);

/// Writes g as SMILES, starting each fragment at its lowest-ranked atom and
/// visiting neighbours in rank order. With canonical ranks the output is a
/// canonical string.
std::string write_smiles(const MolGraph &g, std::span<const int> ranks);

/// write_smiles() with atoms ranked by index.
std::string write_smiles(const MolGraph &g);

}  // namespace mollm

#endif  // MOLLM_SMILES_H_
