//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/scaffold.h"

#include <algorithm>
#include <vector>

#include "mollm/canonical.h"

namespace mollm {

MolGraph murcko_scaffold(const MolGraph &g) {
  const std::vector<bool> in_ring = ring_atoms(g);
  if (std::none_of(in_ring.begin(), in_ring.end(), [](bool b) { return b; })) {
    return MolGraph();
  }

  std::vector<bool> removed(g.num_atoms(), false);
  std::vector<int> degree(g.num_atoms());
  std::vector<int> queue;
  for (int v = 0; v < g.num_atoms(); ++v) {
    degree[v] = g.degree(v);
    if (degree[v] <= 1) queue.push_back(v);
  }
  while (!queue.empty()) {
    const int v = queue.back();
    queue.pop_back();
    if (removed[v]) continue;
    removed[v] = true;
    for (const Neighbor &nb: g.neighbors(v)) {
      if (removed[nb.atom]) continue;
      if (--degree[nb.atom] == 1) queue.push_back(nb.atom);
    }
  }

  // Pruned atoms double-bonded to the scaffold (ring carbonyls, S=O,
  // exocyclic alkenes) stay with it.
  const MolGraph k = kekulize(g);
  std::vector<bool> drop = removed;
  for (int v = 0; v < g.num_atoms(); ++v) {
    if (!removed[v]) continue;
    for (const Neighbor &nb: g.neighbors(v)) {
      if (!removed[nb.atom] && k.bond(nb.bond).order == BondOrder::kDouble) drop[v] = false;
    }
  }
  return remove_atoms(g, drop);
}

std::string scaffold_key(const MolGraph &g) {
  MolGraph s = murcko_scaffold(g);
  if (s.empty()) return {};
  return canonical_smiles(s);
}

}  // namespace mollm
