//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_SCAFFOLD_H_
#define MOLLM_SCAFFOLD_H_

#include <string>

#include "mollm/molgraph.h"

namespace mollm {

/// Bemis-Murcko scaffold: ring systems plus the linkers joining them.
///
/// Terminal atoms are pruned repeatedly until none remain, then pruned
/// atoms double-bonded to what is left are restored. Hydrogens are added
/// back where bonds were cut. Molecules without rings map to the empty
/// graph.
MolGraph murcko_scaffold(const MolGraph &g);

/// Canonical SMILES of murcko_scaffold(g); empty string for the empty
/// scaffold.
std::string scaffold_key(const MolGraph &g);

}  // namespace mollm

#endif  // MOLLM_SCAFFOLD_H_
