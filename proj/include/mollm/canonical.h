//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_CANONICAL_H_
#define MOLLM_CANONICAL_H_

#include <string>
#include <vector>

#include "mollm/molgraph.h"

namespace mollm {

struct CanonicalForm {
  std::vector<int> ranks;  // ranks[i] = canonical position of atom i
  std::string canonical_string;
};

/// Canonical labelling and canonical SMILES.
///
/// Atom classes are refined from local invariants (element, charge,
/// aromaticity, hydrogens, degree, bond orders) and ties are broken by an
/// exhaustive individualization search that keeps the smallest labelled
/// graph, pruned by discovered automorphisms. Fragments are canonicalized
/// independently and joined in sorted string order.
CanonicalForm canonicalize(const MolGraph &g);

/// canonicalize(g).canonical_string
std::string canonical_smiles(const MolGraph &g);

}  // namespace mollm

#endif  // MOLLM_CANONICAL_H_
