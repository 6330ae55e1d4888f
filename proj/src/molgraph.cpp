//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/molgraph.h"

#include <algorithm>
#include <string>
#include <utility>

#include "mollm/element.h"

namespace mollm {

int MolGraph::add_atom(Atom atom) {
  atom.index = num_atoms();
  atoms_.push_back(atom);
  adj_.emplace_back();
  return atom.index;
}

int MolGraph::add_bond(int a, int b, BondOrder order) {
  if (a < 0 || b < 0 || a >= num_atoms() || b >= num_atoms()) {
    throw MolError(MolErrorKind::kInvalidGraph,
                   "bond endpoint out of range: " + std::to_string(a) + "-"
                       + std::to_string(b));
  }
  if (a == b) {
    throw MolError(MolErrorKind::kInvalidGraph,
                   "self bond on atom " + std::to_string(a));
  }
  if (find_bond(a, b) >= 0) {
    throw MolError(MolErrorKind::kInvalidGraph,
                   "duplicate bond " + std::to_string(a) + "-"
                       + std::to_string(b));
  }
  const int idx = num_bonds();
  bonds_.push_back({a, b, order});
  adj_[a].push_back({b, idx});
  adj_[b].push_back({a, idx});
  return idx;
}

int MolGraph::heavy_degree(int atom) const {
  int n = 0;
  for (const Neighbor &nb: adj_[atom]) {
    if (atoms_[nb.atom].element != 1) ++n;
  }
  return n;
}

int MolGraph::find_bond(int a, int b) const {
  if (a < 0 || a >= num_atoms()) return -1;
  for (const Neighbor &nb: adj_[a]) {
    if (nb.atom == b) return nb.bond;
  }
  return -1;
}

int MolGraph::bond_order_sum(int atom) const {
  int sum = 0;
  for (const Neighbor &nb: adj_[atom]) sum += bond_valence(bonds_[nb.bond].order);
  return sum;
}

MolGraph MolGraph::permuted(std::span<const int> perm) const {
  std::vector<Atom> placed(atoms_.size());
  for (int i = 0; i < num_atoms(); ++i) placed[perm[i]] = atoms_[i];

  MolGraph out;
  for (const Atom &a: placed) out.add_atom(a);

  // Bonds are re-added in an order that depends only on the new labels.
  std::vector<Bond> moved;
  moved.reserve(bonds_.size());
  for (const Bond &b: bonds_) {
    int x = perm[b.a], y = perm[b.b];
    if (x > y) std::swap(x, y);
    moved.push_back({x, y, b.order});
  }
  std::sort(moved.begin(), moved.end(), [](const Bond &l, const Bond &r) {
    return std::pair(l.a, l.b) < std::pair(r.a, r.b);
  });
  for (const Bond &b: moved) out.add_bond(b.a, b.b, b.order);
  return out;
}

std::vector<int> connected_components(const MolGraph &g, int *count) {
  std::vector<int> label(g.num_atoms(), -1);
  int n = 0;
  std::vector<int> stack;
  for (int s = 0; s < g.num_atoms(); ++s) {
    if (label[s] >= 0) continue;
    label[s] = n;
    stack.push_back(s);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (const Neighbor &nb: g.neighbors(v)) {
        if (label[nb.atom] < 0) {
          label[nb.atom] = n;
          stack.push_back(nb.atom);
        }
      }
    }
    ++n;
  }
  if (count != nullptr) *count = n;
  return label;
}

std::vector<bool> ring_bonds(const MolGraph &g) {
  // Iterative Tarjan bridge finding; every non-bridge bond is on a cycle.
  const int n = g.num_atoms();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<bool> in_ring(g.num_bonds(), true);
  int timer = 0;

  struct Frame {
    int atom;
    int parent_bond;
    std::size_t next;
  };
  std::vector<Frame> stack;

  for (int root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    disc[root] = low[root] = timer++;
    stack.push_back({root, -1, 0});
    while (!stack.empty()) {
      Frame &f = stack.back();
      auto nbs = g.neighbors(f.atom);
      if (f.next < nbs.size()) {
        const Neighbor nb = nbs[f.next++];
        if (nb.bond == f.parent_bond) continue;
        if (disc[nb.atom] < 0) {
          disc[nb.atom] = low[nb.atom] = timer++;
          stack.push_back({nb.atom, nb.bond, 0});
        } else {
          low[f.atom] = std::min(low[f.atom], disc[nb.atom]);
        }
      } else {
        const Frame done = f;
        stack.pop_back();
        if (!stack.empty()) {
          Frame &parent = stack.back();
          low[parent.atom] = std::min(low[parent.atom], low[done.atom]);
          if (low[done.atom] > disc[parent.atom]) {
            in_ring[done.parent_bond] = false;
          }
        }
      }
    }
  }
  return in_ring;
}

std::vector<bool> ring_atoms(const MolGraph &g) {
  std::vector<bool> rb = ring_bonds(g);
  std::vector<bool> out(g.num_atoms(), false);
  for (int i = 0; i < g.num_bonds(); ++i) {
    if (rb[i]) {
      out[g.bond(i).a] = true;
      out[g.bond(i).b] = true;
    }
  }
  return out;
}

MolGraph induced_subgraph(const MolGraph &g, const std::vector<bool> &keep,
                          std::vector<int> *old_to_new) {
  MolGraph out;
  std::vector<int> map(g.num_atoms(), -1);
  for (int i = 0; i < g.num_atoms(); ++i) {
    if (keep[i]) map[i] = out.add_atom(g.atom(i));
  }
  for (const Bond &b: g.bonds()) {
    if (map[b.a] >= 0 && map[b.b] >= 0) out.add_bond(map[b.a], map[b.b], b.order);
  }
  if (old_to_new != nullptr) *old_to_new = std::move(map);
  return out;
}

namespace {

// Valence actually used by an atom once its aromatic bonds are kekulized:
// one extra unit when the atom needs a double bond.
std::optional<int> used_valence(const MolGraph &g, int i) {
  const Atom &a = g.atom(i);
  int used = g.bond_order_sum(i) + a.explicit_h;
  if (!a.aromatic) return used;
  auto fill = fill_valence(a.element, a.formal_charge, used);
  if (!fill) return std::nullopt;
  return *fill > used ? used + 1 : used;
}

}  // namespace

bool valence_ok(const MolGraph &g) {
  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atom(i);
    if (a.explicit_h < 0) return false;
    auto max = max_valence(a.element, a.formal_charge);
    if (!max) continue;
    auto used = used_valence(g, i);
    if (!used || *used > *max) return false;
  }
  return true;
}

void check_valence(const MolGraph &g) {
  for (int i = 0; i < g.num_atoms(); ++i) {
    const Atom &a = g.atom(i);
    auto max = max_valence(a.element, a.formal_charge);
    if (!max) continue;
    auto used = used_valence(g, i);
    if (a.explicit_h < 0 || !used || *used > *max) {
      throw MolError(MolErrorKind::kValence,
                     "valence violation on atom " + std::to_string(i) + " ("
                         + std::string(element_symbol(a.element)) + ")");
    }
  }
}

}  // namespace mollm
