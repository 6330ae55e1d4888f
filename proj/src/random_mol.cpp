//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/random_mol.h"

#include <array>
#include <queue>
#include <string_view>
#include <vector>

#include "mollm/element.h"
#include "mollm/smiles.h"

namespace mollm {

namespace {

constexpr std::array<std::string_view, 28> kFragments = {
  "c1ccccc1",     "c1ccncc1",       "c1cc[nH]c1",  "c1ccoc1",
  "c1ccsc1",      "c1c[nH]cn1",     "c1cncnc1",    "c1ccc2ccccc2c1",
  "c1ccc2[nH]ccc2c1", "C1CCCCC1",   "C1CCCC1",     "C1CC1",
  "C1CCNCC1",     "C1COCCN1",       "C1CCOC1",     "O=C1CCCN1",
  "CC",           "CC(C)C",         "CC(=O)O",     "CC(=O)N",
  "CC#N",         "CC(=O)OC",       "CS(=O)(=O)N", "C[N+](=O)[O-]",
  "CC(F)(F)F",    "C=CC",           "COC",         "CP(=O)(O)O",
};

struct ElementWeight {
  int z;
  int weight;
};

constexpr std::array<ElementWeight, 8> kSubstituents = {{
  {6, 50}, {7, 15}, {8, 15}, {16, 5}, {9, 5}, {17, 5}, {35, 3}, {53, 2},
}};

int pick_element(Rng &rng) {
  int total = 0;
  for (auto [z, w]: kSubstituents) total += w;
  int r = static_cast<int>(rng.uniform_index(total));
  for (auto [z, w]: kSubstituents) {
    if (r < w) return z;
    r -= w;
  }
  return 6;
}

MolGraph fragment(Rng &rng) {
  return kekulize(parse_smiles(kFragments[rng.uniform_index(kFragments.size())]));
}

std::vector<int> atoms_with_h(const MolGraph &g, int min_h) {
  std::vector<int> out;
  for (int v = 0; v < g.num_atoms(); ++v) {
    if (g.atom(v).explicit_h >= min_h) out.push_back(v);
  }
  return out;
}

std::vector<int> distances_from(const MolGraph &g, int s) {
  std::vector<int> dist(g.num_atoms(), -1);
  std::queue<int> q;
  dist[s] = 0;
  q.push(s);
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    for (const Neighbor &nb: g.neighbors(v)) {
      if (dist[nb.atom] < 0) {
        dist[nb.atom] = dist[v] + 1;
        q.push(nb.atom);
      }
    }
  }
  return dist;
}

void add_substituent(MolGraph &g, Rng &rng) {
  const int z = pick_element(rng);
  const int max_order = (z == 6 || z == 7) ? 3 : (z == 8 || z == 16) ? 2 : 1;
  const auto sites = atoms_with_h(g, 1);
  if (sites.empty()) return;
  const int site = sites[rng.uniform_index(sites.size())];
  int order = 1;
  const double roll = rng.uniform01();
  if (roll < 0.06 && max_order >= 3) order = 3;
  else if (roll < 0.25 && max_order >= 2) order = 2;
  if (g.atom(site).aromatic) order = 1;
  order = std::min(order, g.atom(site).explicit_h);
  const auto h = fill_valence(z, 0, order);
  if (!h) return;
  g.atom(site).explicit_h -= order;
  Atom a;
  a.element = z;
  a.explicit_h = *h - order;
  const int v = g.add_atom(a);
  g.add_bond(site, v, static_cast<BondOrder>(order));
}

void add_fragment(MolGraph &g, Rng &rng) {
  const MolGraph f = fragment(rng);
  const auto sites = atoms_with_h(g, 1);
  const auto fsites = atoms_with_h(f, 1);
  if (sites.empty() || fsites.empty()) return;
  const int site = sites[rng.uniform_index(sites.size())];
  const int fsite = fsites[rng.uniform_index(fsites.size())];
  const int offset = g.num_atoms();
  for (const Atom &a: f.atoms()) g.add_atom(a);
  for (const Bond &b: f.bonds()) g.add_bond(b.a + offset, b.b + offset, b.order);
  g.atom(site).explicit_h -= 1;
  g.atom(fsite + offset).explicit_h -= 1;
  g.add_bond(site, fsite + offset, BondOrder::kSingle);
}

void close_ring(MolGraph &g, Rng &rng) {
  const auto sites = atoms_with_h(g, 1);
  if (sites.size() < 2) return;
  const int a = sites[rng.uniform_index(sites.size())];
  const auto dist = distances_from(g, a);
  std::vector<int> partners;
  for (int b: sites) {
    if (dist[b] >= 4 && dist[b] <= 6) partners.push_back(b);
  }
  if (partners.empty()) return;
  const int b = partners[rng.uniform_index(partners.size())];
  g.atom(a).explicit_h -= 1;
  g.atom(b).explicit_h -= 1;
  g.add_bond(a, b, BondOrder::kSingle);
}

void ionize(MolGraph &g, Rng &rng) {
  std::vector<int> sites;
  for (int v = 0; v < g.num_atoms(); ++v) {
    const Atom &a = g.atom(v);
    if (a.formal_charge != 0 || a.aromatic) continue;
    bool all_single = true;
    for (const Neighbor &nb: g.neighbors(v)) {
      all_single = all_single && g.bond(nb.bond).order == BondOrder::kSingle;
    }
    if (!all_single) continue;
    if ((a.element == 7 && g.degree(v) + a.explicit_h == 3)
        || (a.element == 8 && a.explicit_h == 1 && g.degree(v) == 1)) {
      sites.push_back(v);
    }
  }
  if (sites.empty()) return;
  Atom &a = g.atom(sites[rng.uniform_index(sites.size())]);
  if (a.element == 7) {
    a.formal_charge = 1;
    a.explicit_h += 1;
  } else {
    a.formal_charge = -1;
    a.explicit_h = 0;
  }
}

}  // namespace

MolGraph random_molecule(Rng &rng, const RandomMolOptions &opts) {
  MolGraph g = fragment(rng);
  const int steps = rng.uniform_int(opts.min_steps, opts.max_steps);
  for (int s = 0; s < steps && g.num_atoms() < opts.max_heavy_atoms; ++s) {
    const double roll = rng.uniform01();
    if (roll < opts.ring_closure_prob) {
      close_ring(g, rng);
    } else if (roll < opts.ring_closure_prob + opts.charge_prob) {
      ionize(g, rng);
    } else if (roll < 0.55) {
      add_fragment(g, rng);
    } else {
      add_substituent(g, rng);
    }
  }
  perceive_aromaticity(g);
  check_valence(g);
  return g;
}

}  // namespace mollm
