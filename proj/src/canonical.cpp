//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/canonical.h"

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "mollm/smiles.h"

namespace mollm {
namespace {

using Key = std::vector<int>;

// Replaces keys by their dense rank in sorted order.
std::vector<int> dense_ranks(const std::vector<Key> &keys) {
  const int n = static_cast<int>(keys.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return keys[x] < keys[y]; });
  std::vector<int> cls(n);
  int c = -1;
  for (int i = 0; i < n; ++i) {
    if (i == 0 || keys[order[i]] != keys[order[i - 1]]) ++c;
    cls[order[i]] = c;
  }
  return cls;
}

int count_classes(const std::vector<int> &cls) {
  return cls.empty() ? 0 : *std::max_element(cls.begin(), cls.end()) + 1;
}

class Canonicalizer {
public:
  explicit Canonicalizer(const MolGraph &g): g_(g), n_(g.num_atoms()) {
    std::vector<Key> keys(n_);
    for (int v = 0; v < n_; ++v) {
      const Atom &a = g_.atom(v);
      Key k {a.element, a.formal_charge, a.aromatic ? 1 : 0, a.explicit_h,
             g_.degree(v)};
      std::vector<int> orders;
      for (const Neighbor &nb: g_.neighbors(v)) {
        orders.push_back(static_cast<int>(g_.bond(nb.bond).order));
      }
      std::sort(orders.begin(), orders.end());
      k.insert(k.end(), orders.begin(), orders.end());
      keys[v] = std::move(k);
      atom_label_.push_back({a.element, a.formal_charge, a.aromatic ? 1 : 0,
                             a.explicit_h});
    }
    root_ = refine(dense_ranks(keys));
  }

  std::vector<int> run() {
    std::vector<int> prefix;
    search(root_, prefix);
    return best_labels_;
  }

private:
  std::vector<int> refine(std::vector<int> cls) const {
    int classes = count_classes(cls);
    while (classes < n_) {
      std::vector<Key> keys(n_);
      for (int v = 0; v < n_; ++v) {
        std::vector<std::pair<int, int>> nbr;
        for (const Neighbor &nb: g_.neighbors(v)) {
          nbr.emplace_back(static_cast<int>(g_.bond(nb.bond).order), cls[nb.atom]);
        }
        std::sort(nbr.begin(), nbr.end());
        Key k {cls[v]};
        for (auto [o, c]: nbr) {
          k.push_back(o);
          k.push_back(c);
        }
        keys[v] = std::move(k);
      }
      std::vector<int> next = dense_ranks(keys);
      const int next_classes = count_classes(next);
      cls = std::move(next);
      if (next_classes == classes) break;
      classes = next_classes;
    }
    return cls;
  }

  std::vector<int> individualize(const std::vector<int> &cls, int v) const {
    std::vector<Key> keys(n_);
    for (int u = 0; u < n_; ++u) {
      keys[u] = {cls[u], (cls[u] == cls[v] && u != v) ? 1 : 0};
    }
    return refine(dense_ranks(keys));
  }

  std::vector<int> certificate(const std::vector<int> &labels) const {
    std::vector<int> inv(n_);
    for (int v = 0; v < n_; ++v) inv[labels[v]] = v;
    std::vector<int> cert;
    cert.reserve(n_ * 4 + g_.num_bonds() * 3);
    for (int r = 0; r < n_; ++r) {
      const auto &l = atom_label_[inv[r]];
      cert.insert(cert.end(), l.begin(), l.end());
    }
    std::vector<std::tuple<int, int, int>> bonds;
    for (const Bond &b: g_.bonds()) {
      int x = labels[b.a], y = labels[b.b];
      if (x > y) std::swap(x, y);
      bonds.emplace_back(x, y, static_cast<int>(b.order));
    }
    std::sort(bonds.begin(), bonds.end());
    for (auto [x, y, o]: bonds) {
      cert.push_back(x);
      cert.push_back(y);
      cert.push_back(o);
    }
    return cert;
  }

  void leaf(const std::vector<int> &labels) {
    std::vector<int> cert = certificate(labels);
    if (best_cert_.empty() || cert < best_cert_) {
      best_cert_ = std::move(cert);
      best_labels_ = labels;
      return;
    }
    if (cert == best_cert_) {
      // Two leaves with the same labelled graph differ by an automorphism.
      std::vector<int> inv(n_);
      for (int v = 0; v < n_; ++v) inv[best_labels_[v]] = v;
      std::vector<int> perm(n_);
      for (int v = 0; v < n_; ++v) perm[v] = inv[labels[v]];
      automorphisms_.push_back(std::move(perm));
    }
  }

  int find(std::vector<int> &uf, int x) const {
    while (uf[x] != x) x = uf[x] = uf[uf[x]];
    return x;
  }

  // Orbits under the discovered automorphisms that fix every prefix atom.
  std::vector<int> stabilizer_orbits(const std::vector<int> &prefix) {
    std::vector<int> uf(n_);
    std::iota(uf.begin(), uf.end(), 0);
    for (const auto &perm: automorphisms_) {
      bool fixes = std::all_of(prefix.begin(), prefix.end(),
                               [&](int v) { return perm[v] == v; });
      if (!fixes) continue;
      for (int v = 0; v < n_; ++v) {
        int a = find(uf, v), b = find(uf, perm[v]);
        if (a != b) uf[std::max(a, b)] = std::min(a, b);
      }
    }
    for (int v = 0; v < n_; ++v) uf[v] = find(uf, v);
    return uf;
  }

  void search(const std::vector<int> &cls, std::vector<int> &prefix) {
    if (count_classes(cls) == n_) {
      leaf(cls);
      return;
    }

    // Target cell: the lowest non-singleton class.
    std::vector<int> size(n_, 0);
    for (int c: cls) ++size[c];
    int target = 0;
    while (size[target] < 2) ++target;

    std::vector<int> cell;
    for (int v = 0; v < n_; ++v) {
      if (cls[v] == target) cell.push_back(v);
    }

    std::vector<int> explored;
    for (int v: cell) {
      if (!explored.empty()) {
        std::vector<int> orbit = stabilizer_orbits(prefix);
        bool seen = std::any_of(explored.begin(), explored.end(),
                                [&](int u) { return orbit[u] == orbit[v]; });
        if (seen) continue;
      }
      explored.push_back(v);
      prefix.push_back(v);
      search(individualize(cls, v), prefix);
      prefix.pop_back();
    }
  }

  const MolGraph &g_;
  int n_;
  std::vector<std::vector<int>> atom_label_;
  std::vector<int> root_;
  std::vector<int> best_cert_;
  std::vector<int> best_labels_;
  std::vector<std::vector<int>> automorphisms_;
};

std::vector<int> canonical_labels(const MolGraph &g) {
  if (g.empty()) return {};
  return Canonicalizer(g).run();
}

}  // namespace

CanonicalForm canonicalize(const MolGraph &g) {
  CanonicalForm out;
  out.ranks.assign(g.num_atoms(), 0);
  if (g.empty()) return out;

  int nfrag = 0;
  std::vector<int> comp = connected_components(g, &nfrag);

  struct Fragment {
    std::string text;
    std::vector<int> atoms;  // original indices in canonical order
  };
  std::vector<Fragment> frags(nfrag);
  for (int f = 0; f < nfrag; ++f) {
    std::vector<bool> keep(g.num_atoms());
    for (int v = 0; v < g.num_atoms(); ++v) keep[v] = comp[v] == f;
    std::vector<int> old_to_new;
    MolGraph sub = induced_subgraph(g, keep, &old_to_new);
    std::vector<int> labels = canonical_labels(sub);
    frags[f].text = write_smiles(sub, labels);
    frags[f].atoms.resize(sub.num_atoms());
    for (int v = 0; v < g.num_atoms(); ++v) {
      if (old_to_new[v] >= 0) frags[f].atoms[labels[old_to_new[v]]] = v;
    }
  }
  std::stable_sort(frags.begin(), frags.end(),
                   [](const Fragment &x, const Fragment &y) { return x.text < y.text; });

  int next = 0;
  for (std::size_t f = 0; f < frags.size(); ++f) {
    if (f > 0) out.canonical_string += '.';
    out.canonical_string += frags[f].text;
    for (int v: frags[f].atoms) out.ranks[v] = next++;
  }
  return out;
}

std::string canonical_smiles(const MolGraph &g) {
  return canonicalize(g).canonical_string;
}

}  // namespace mollm
