//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "oracles.h"

#include <algorithm>
#include <deque>
#include <functional>

namespace mollm::oracle {

namespace {

bool same_atom(const Atom &x, const Atom &y) {
  return x.element == y.element && x.formal_charge == y.formal_charge
         && x.explicit_h == y.explicit_h && x.aromatic == y.aromatic;
}

// Bond order between a and b, 0 when not bonded.
int order_between(const MolGraph &g, int a, int b) {
  for (const Neighbor &nb: g.neighbors(a)) {
    if (nb.atom == b) return static_cast<int>(g.bond(nb.bond).order);
  }
  return 0;
}

class Vf2 {
public:
  Vf2(const MolGraph &g1, const MolGraph &g2, bool enumerate_all)
      : g1_(g1), g2_(g2), all_(enumerate_all), core1_(g1.num_atoms(), -1),
        core2_(g2.num_atoms(), -1), t1_(g1.num_atoms(), 0), t2_(g2.num_atoms(), 0) { }

  int run() {
    if (g1_.num_atoms() != g2_.num_atoms() || g1_.num_bonds() != g2_.num_bonds()) return 0;
    search(0);
    return found_;
  }

private:
  bool in_t1(int n) const { return core1_[n] < 0 && t1_[n] > 0; }
  bool in_t2(int m) const { return core2_[m] < 0 && t2_[m] > 0; }

  bool feasible(int n, int m) const {
    if (!same_atom(g1_.atom(n), g2_.atom(m))) return false;
    if (g1_.degree(n) != g2_.degree(m)) return false;
    int term1 = 0, new1 = 0, term2 = 0, new2 = 0;
    for (const Neighbor &nb: g1_.neighbors(n)) {
      const int n2 = nb.atom;
      if (core1_[n2] >= 0) {
        if (order_between(g2_, m, core1_[n2]) != static_cast<int>(g1_.bond(nb.bond).order)) {
          return false;
        }
      } else if (t1_[n2] > 0) {
        ++term1;
      } else {
        ++new1;
      }
    }
    for (const Neighbor &nb: g2_.neighbors(m)) {
      const int m2 = nb.atom;
      if (core2_[m2] >= 0) {
        if (order_between(g1_, n, core2_[m2]) == 0) return false;
      } else if (t2_[m2] > 0) {
        ++term2;
      } else {
        ++new2;
      }
    }
    return term1 == term2 && new1 == new2;
  }

  void mark(std::vector<int> &t, const MolGraph &g, int v, int depth) {
    if (t[v] == 0) t[v] = depth;
    for (const Neighbor &nb: g.neighbors(v)) {
      if (t[nb.atom] == 0) t[nb.atom] = depth;
    }
  }

  void unmark(std::vector<int> &t, int depth) {
    for (int &x: t) {
      if (x == depth) x = 0;
    }
  }

  bool search(int depth) {
    const int n_atoms = g1_.num_atoms();
    if (depth == n_atoms) {
      ++found_;
      return !all_;
    }
    int n = -1;
    bool terminal = false;
    for (int i = 0; i < n_atoms; ++i) {
      if (in_t1(i)) {
        n = i;
        terminal = true;
        break;
      }
    }
    if (n < 0) {
      for (int i = 0; i < n_atoms; ++i) {
        if (core1_[i] < 0) {
          n = i;
          break;
        }
      }
    }
    for (int m = 0; m < n_atoms; ++m) {
      if (core2_[m] >= 0) continue;
      if (terminal != in_t2(m)) continue;
      if (!feasible(n, m)) continue;
      core1_[n] = m;
      core2_[m] = n;
      mark(t1_, g1_, n, depth + 1);
      mark(t2_, g2_, m, depth + 1);
      const bool stop = search(depth + 1);
      unmark(t1_, depth + 1);
      unmark(t2_, depth + 1);
      core1_[n] = -1;
      core2_[m] = -1;
      if (stop) return true;
    }
    return false;
  }

  const MolGraph &g1_;
  const MolGraph &g2_;
  bool all_;
  std::vector<int> core1_, core2_, t1_, t2_;
  int found_ = 0;
};

std::vector<bool> atoms_on_cycles(const MolGraph &g) {
  std::vector<bool> out(g.num_atoms(), false);
  for (int b = 0; b < g.num_bonds(); ++b) {
    const Bond &bond = g.bond(b);
    std::vector<bool> seen(g.num_atoms(), false);
    std::deque<int> queue {bond.a};
    seen[bond.a] = true;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (const Neighbor &nb: g.neighbors(v)) {
        if (nb.bond == b || seen[nb.atom]) continue;
        seen[nb.atom] = true;
        queue.push_back(nb.atom);
      }
    }
    if (seen[bond.b]) out[bond.a] = out[bond.b] = true;
  }
  return out;
}

bool query_accepts(const AtomQuery &q, const MolGraph &g, int v, const std::vector<bool> &cyclic) {
  const Atom &a = g.atom(v);
  bool any = false;
  for (const AtomAlternative &alt: q.alternatives) {
    const bool element_ok = alt.element == 0 || alt.element == a.element;
    const bool aromatic_ok = !alt.aromatic.has_value() || *alt.aromatic == a.aromatic;
    any = any || (element_ok && aromatic_ok);
  }
  if (!any) return false;
  int heavy = 0;
  for (const Neighbor &nb: g.neighbors(v)) heavy += g.atom(nb.atom).element != 1;
  for (const AtomConstraint &c: q.constraints) {
    bool holds = false;
    if (c.kind == AtomConstraint::kTotalH) holds = a.explicit_h == c.value;
    if (c.kind == AtomConstraint::kDegree) holds = heavy == c.value;
    if (c.kind == AtomConstraint::kConnections) holds = g.degree(v) + a.explicit_h == c.value;
    if (c.kind == AtomConstraint::kCharge) holds = a.formal_charge == c.value;
    if (c.kind == AtomConstraint::kInRing) holds = cyclic[v];
    if (c.negated) holds = !holds;
    if (!holds) return false;
  }
  return true;
}

bool bond_accepts(BondQuery q, int order) {
  const int single = static_cast<int>(BondOrder::kSingle);
  const int aromatic = static_cast<int>(BondOrder::kAromatic);
  if (order == 0) return false;
  if (q == BondQuery::kAny) return true;
  if (q == BondQuery::kSingleOrAromatic) return order == single || order == aromatic;
  if (q == BondQuery::kSingle) return order == single;
  if (q == BondQuery::kDouble) return order == static_cast<int>(BondOrder::kDouble);
  if (q == BondQuery::kTriple) return order == static_cast<int>(BondOrder::kTriple);
  return order == aromatic;
}

}  // namespace

bool isomorphic(const MolGraph &a, const MolGraph &b) {
  return Vf2(a, b, false).run() > 0;
}

int count_automorphisms(const MolGraph &g) {
  return Vf2(g, g, true).run();
}

std::vector<std::vector<int>> brute_force_embeddings(const Pattern &p, const MolGraph &g) {
  const std::vector<bool> cyclic = atoms_on_cycles(g);
  const int k = p.num_atoms();
  std::vector<std::vector<int>> out;
  std::vector<int> map(k, -1);
  std::vector<bool> used(g.num_atoms(), false);
  std::function<void(int)> place = [&](int i) {
    if (i == k) {
      for (const QueryBond &b: p.bonds()) {
        if (!bond_accepts(b.order, order_between(g, map[b.a], map[b.b]))) return;
      }
      out.push_back(map);
      return;
    }
    for (int v = 0; v < g.num_atoms(); ++v) {
      if (used[v] || !query_accepts(p.atoms()[i], g, v, cyclic)) continue;
      used[v] = true;
      map[i] = v;
      place(i + 1);
      used[v] = false;
    }
  };
  if (k > 0) place(0);
  return out;
}

std::set<std::vector<int>> embedding_atom_sets(const std::vector<std::vector<int>> &embeddings) {
  std::set<std::vector<int>> out;
  for (std::vector<int> e: embeddings) {
    std::sort(e.begin(), e.end());
    out.insert(e);
  }
  return out;
}

std::set<std::vector<int>> simple_paths(const MolGraph &g, int min_len, int max_len) {
  std::set<std::vector<int>> out;
  std::vector<std::vector<int>> walks;
  for (int v = 0; v < g.num_atoms(); ++v) walks.push_back({v});
  for (int len = 1; len <= max_len; ++len) {
    std::vector<std::vector<int>> longer;
    for (const std::vector<int> &w: walks) {
      for (const Neighbor &nb: g.neighbors(w.back())) {
        std::vector<int> x = w;
        x.push_back(nb.atom);
        std::vector<int> sorted = x;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;
        longer.push_back(std::move(x));
      }
    }
    walks = std::move(longer);
    if (len < min_len) continue;
    for (const std::vector<int> &w: walks) {
      std::vector<int> r(w.rbegin(), w.rend());
      out.insert(std::min(w, r));
    }
  }
  return out;
}

std::vector<std::int64_t> path_label(const MolGraph &g, const std::vector<int> &atoms) {
  auto words = [&](const std::vector<int> &seq) {
    std::vector<std::int64_t> w;
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const Atom &a = g.atom(seq[i]);
      w.push_back(a.element * 2 + (a.aromatic ? 1 : 0));
      if (i + 1 < seq.size()) w.push_back(order_between(g, seq[i], seq[i + 1]));
    }
    return w;
  };
  const std::vector<int> reversed(atoms.rbegin(), atoms.rend());
  std::vector<std::int64_t> label = std::min(words(atoms), words(reversed));
  label.push_back(static_cast<std::int64_t>(atoms.size()) - 1);
  return label;
}

MolGraph pruned_scaffold(const MolGraph &g) {
  const int n = g.num_atoms();
  std::vector<bool> kept(n, true);
  for (bool changed = true; changed;) {
    changed = false;
    for (int v = 0; v < n; ++v) {
      if (!kept[v]) continue;
      int live = 0;
      for (const Neighbor &nb: g.neighbors(v)) live += kept[nb.atom] && g.atom(nb.atom).element != 1;
      if (live <= 1) {
        kept[v] = false;
        changed = true;
      }
    }
  }
  std::vector<bool> framework = kept;
  for (int v = 0; v < n; ++v) {
    if (framework[v]) continue;
    for (const Neighbor &nb: g.neighbors(v)) {
      if (framework[nb.atom] && g.bond(nb.bond).order == BondOrder::kDouble) kept[v] = true;
    }
  }

  MolGraph out;
  std::vector<int> index(n, -1);
  for (int v = 0; v < n; ++v) {
    if (!kept[v]) continue;
    Atom a = g.atom(v);
    for (const Neighbor &nb: g.neighbors(v)) {
      if (!kept[nb.atom]) a.explicit_h += bond_valence(g.bond(nb.bond).order);
    }
    index[v] = out.add_atom(a);
  }
  for (int b = 0; b < g.num_bonds(); ++b) {
    const Bond &bond = g.bond(b);
    if (kept[bond.a] && kept[bond.b]) out.add_bond(index[bond.a], index[bond.b], bond.order);
  }
  return out;
}

}  // namespace mollm::oracle
