//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "mollm/element.h"
#include "mollm/molgraph.h"

namespace mollm {
namespace {

constexpr int kMaxAromaticRing = 8;
constexpr long kKekuleSearchBudget = 2'000'000;

// Whether an atom taking part in aromatic bonds must receive one double bond.
// Implicit-hydrogen atoms decide from heavy bonds alone; the rest include
// their fixed hydrogen count.
bool needs_double(const MolGraph &g, int i, bool implicit_h) {
  const Atom &a = g.atom(i);
  const int used = g.bond_order_sum(i) + (implicit_h ? 0 : a.explicit_h);
  auto fill = fill_valence(a.element, a.formal_charge, used);
  return fill && *fill - used >= 1;
}

class KekuleMatcher {
public:
  KekuleMatcher(const MolGraph &g, std::vector<bool> needy)
      : g_(g), needy_(std::move(needy)), mate_(g.num_atoms(), -1) { }

  bool solve() { return search(); }

  int mate(int atom) const { return mate_[atom]; }

private:
  int options(int v) const {
    int n = 0;
    for (const Neighbor &nb: g_.neighbors(v)) {
      if (usable(nb)) ++n;
    }
    return n;
  }

  bool usable(const Neighbor &nb) const {
    return g_.bond(nb.bond).order == BondOrder::kAromatic && needy_[nb.atom]
           && mate_[nb.atom] < 0;
  }

  bool search() {
    if (++steps_ > kKekuleSearchBudget) return false;

    int best = -1, best_opts = 0;
    for (int v = 0; v < g_.num_atoms(); ++v) {
      if (!needy_[v] || mate_[v] >= 0) continue;
      int opts = options(v);
      if (best < 0 || opts < best_opts) {
        best = v;
        best_opts = opts;
        if (opts <= 1) break;
      }
    }
    if (best < 0) return true;
    if (best_opts == 0) return false;

    for (const Neighbor &nb: g_.neighbors(best)) {
      if (!usable(nb)) continue;
      mate_[best] = nb.atom;
      mate_[nb.atom] = best;
      if (search()) return true;
      mate_[best] = mate_[nb.atom] = -1;
    }
    return false;
  }

  const MolGraph &g_;
  std::vector<bool> needy_;
  std::vector<int> mate_;
  long steps_ = 0;
};

// Assigns single/double orders to aromatic bonds in place.
void kekulize_in_place(MolGraph &g, const std::vector<bool> &implicit_h) {
  std::vector<bool> participates(g.num_atoms(), false);
  bool any = false;
  for (const Bond &b: g.bonds()) {
    if (b.order == BondOrder::kAromatic) {
      participates[b.a] = participates[b.b] = true;
      any = true;
    }
  }
  for (int i = 0; i < g.num_atoms(); ++i) {
    if (g.atom(i).aromatic && !participates[i]) {
      throw MolError(MolErrorKind::kKekulize,
                     "aromatic atom " + std::to_string(i)
                         + " is not part of an aromatic ring");
    }
  }
  if (!any) {
    for (int i = 0; i < g.num_atoms(); ++i) g.atom(i).aromatic = false;
    return;
  }

  std::vector<bool> needy(g.num_atoms(), false);
  for (int i = 0; i < g.num_atoms(); ++i) {
    if (participates[i]) needy[i] = needs_double(g, i, implicit_h[i]);
  }

  KekuleMatcher matcher(g, needy);
  if (!matcher.solve()) {
    throw MolError(MolErrorKind::kKekulize,
                   "cannot assign a Kekule structure to the aromatic system");
  }
  for (int i = 0; i < g.num_bonds(); ++i) {
    const Bond &b = g.bond(i);
    if (b.order != BondOrder::kAromatic) continue;
    g.set_bond_order(i, matcher.mate(b.a) == b.b ? BondOrder::kDouble
                                                 : BondOrder::kSingle);
  }
  for (int i = 0; i < g.num_atoms(); ++i) g.atom(i).aromatic = false;
}

bool has_aromatic_bond(const MolGraph &g) {
  return std::any_of(g.bonds().begin(), g.bonds().end(), [](const Bond &b) {
    return b.order == BondOrder::kAromatic;
  });
}

bool is_lone_pair_donor_o(int z) { return z == 8 || z == 16 || z == 34 || z == 52; }
bool is_lone_pair_donor_n(int z) { return z == 7 || z == 15 || z == 33; }

// pi electrons an atom contributes to a ring, or -1 when it cannot be
// part of an aromatic ring.
int pi_contribution(const MolGraph &g, int v, const std::vector<bool> &rbond) {
  const Atom &a = g.atom(v);
  int ring_double = 0, exo_double = 0, exo_partner = -1;
  for (const Neighbor &nb: g.neighbors(v)) {
    BondOrder o = g.bond(nb.bond).order;
    if (o == BondOrder::kTriple) return -1;
    if (o == BondOrder::kDouble) {
      if (rbond[nb.bond]) {
        ++ring_double;
      } else {
        ++exo_double;
        exo_partner = nb.atom;
      }
    }
  }
  if (ring_double + exo_double > 1) return -1;
  if (ring_double == 1) return 1;
  if (exo_double == 1) {
    int pz = g.atom(exo_partner).element;
    return (pz == 7 || pz == 8 || pz == 16 || pz == 34) ? 0 : -1;
  }

  const int connections = g.degree(v) + a.explicit_h;
  const int z = a.element, q = a.formal_charge;
  if (q == 0 && is_lone_pair_donor_n(z) && connections == 3) return 2;
  if (q == 0 && is_lone_pair_donor_o(z) && connections == 2) return 2;
  if (z == 6 && q == -1 && connections == 3) return 2;
  if (z == 6 && q == 1 && connections == 3) return 0;
  if (z == 5 && q == 0 && connections == 3) return 0;
  return -1;
}

}  // namespace

MolGraph kekulize(const MolGraph &g) {
  MolGraph out = g;
  kekulize_in_place(out, std::vector<bool>(g.num_atoms(), false));
  return out;
}

void perceive_aromaticity(MolGraph &g) {
  if (has_aromatic_bond(g)) g = kekulize(g);
  for (int i = 0; i < g.num_atoms(); ++i) g.atom(i).aromatic = false;

  const std::vector<bool> rbond = ring_bonds(g);
  std::vector<int> contrib(g.num_atoms(), -1);
  for (int v = 0; v < g.num_atoms(); ++v) {
    bool in_ring = false;
    for (const Neighbor &nb: g.neighbors(v)) in_ring = in_ring || rbond[nb.bond];
    if (in_ring) contrib[v] = pi_contribution(g, v, rbond);
  }

  std::vector<bool> arom_bond(g.num_bonds(), false);
  std::vector<int> path;
  std::vector<int> path_bonds;
  std::vector<bool> on_path(g.num_atoms(), false);

  auto close_cycle = [&](int closing_bond) {
    int electrons = 0;
    for (int v: path) electrons += contrib[v];
    if (electrons % 4 != 2) return;
    for (int v: path) g.atom(v).aromatic = true;
    for (int b: path_bonds) arom_bond[b] = true;
    arom_bond[closing_bond] = true;
  };

  // Simple cycles up to kMaxAromaticRing atoms, each rooted at its lowest
  // atom and visited in one direction only.
  auto extend = [&](auto &&self, int start, int v) -> void {
    for (const Neighbor &nb: g.neighbors(v)) {
      if (!rbond[nb.bond]) continue;
      const int u = nb.atom;
      if (u == start) {
        if (path.size() >= 3 && path[1] < path.back()) close_cycle(nb.bond);
        continue;
      }
      if (u < start || on_path[u] || contrib[u] < 0) continue;
      if (static_cast<int>(path.size()) >= kMaxAromaticRing) continue;
      on_path[u] = true;
      path.push_back(u);
      path_bonds.push_back(nb.bond);
      self(self, start, u);
      path.pop_back();
      path_bonds.pop_back();
      on_path[u] = false;
    }
  };

  for (int s = 0; s < g.num_atoms(); ++s) {
    if (contrib[s] < 0) continue;
    on_path[s] = true;
    path.assign(1, s);
    path_bonds.clear();
    extend(extend, s, s);
    on_path[s] = false;
  }

  for (int i = 0; i < g.num_bonds(); ++i) {
    if (arom_bond[i]) g.set_bond_order(i, BondOrder::kAromatic);
  }
}

MolGraph resolve_molecule(MolGraph raw, const std::vector<bool> &implicit_h) {
  // Aromatic bonds outside rings (e.g. the link in "c1ccccc1c1ccccc1") are
  // plain single bonds.
  const std::vector<bool> rbond = ring_bonds(raw);
  for (int i = 0; i < raw.num_bonds(); ++i) {
    if (raw.bond(i).order == BondOrder::kAromatic && !rbond[i]) {
      raw.set_bond_order(i, BondOrder::kSingle);
    }
  }

  kekulize_in_place(raw, implicit_h);

  for (int i = 0; i < raw.num_atoms(); ++i) {
    Atom &a = raw.atom(i);
    if (!implicit_h[i]) continue;
    const int used = raw.bond_order_sum(i);
    if (!allowed_valences(a.element, a.formal_charge)) {
      a.explicit_h = 0;
      continue;
    }
    auto fill = fill_valence(a.element, a.formal_charge, used);
    if (!fill) {
      throw MolError(MolErrorKind::kValence,
                     "valence violation on atom " + std::to_string(i) + " ("
                         + std::string(element_symbol(a.element)) + ")");
    }
    a.explicit_h = *fill - used;
  }

  check_valence(raw);
  perceive_aromaticity(raw);
  return raw;
}

MolGraph remove_atoms(const MolGraph &g, const std::vector<bool> &remove) {
  MolGraph k = kekulize(g);
  for (const Bond &b: k.bonds()) {
    if (remove[b.a] == remove[b.b]) continue;
    const int kept = remove[b.a] ? b.b : b.a;
    k.atom(kept).explicit_h += bond_valence(b.order);
  }
  std::vector<bool> keep(remove.size());
  for (std::size_t i = 0; i < remove.size(); ++i) keep[i] = !remove[i];
  MolGraph out = induced_subgraph(k, keep);
  perceive_aromaticity(out);
  return out;
}

}  // namespace mollm
