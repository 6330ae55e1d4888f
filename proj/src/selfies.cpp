//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/selfies.h"

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdlib>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mollm/canonical.h"
#include "mollm/element.h"

namespace mollm {
namespace {

constexpr std::array<std::string_view, 16> kIndexAlphabet = {
    "[C]",  "[Ring1]", "[Ring2]", "[Branch1]", "[=Branch1]", "[#Branch1]",
    "[Branch2]", "[=Branch2]", "[#Branch2]", "[O]",  "[N]",  "[=N]",
    "[=C]", "[#C]",  "[S]",  "[P]",
};

int index_digit(std::string_view symbol) {
  for (int i = 0; i < 16; ++i) {
    if (kIndexAlphabet[i] == symbol) return i;
  }
  return 0;
}

enum class SymbolKind { kAtom, kBranch, kRing, kNop, kDot };

struct Symbol {
  SymbolKind kind = SymbolKind::kNop;
  std::string text;
  int order = 1;       // bond prefix / branch or ring bond type
  int digits = 0;      // index symbols read by branch or ring
  int element = 0;
  int charge = 0;
  int h = 0;
  bool fixed_h = false;
  int capacity = 0;
};

int prefix_order(std::string_view prefix) {
  if (prefix.find('#') != std::string_view::npos) return 3;
  if (prefix.find('=') != std::string_view::npos) return 2;
  return 1;
}

bool all_bond_chars(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](char c) {
    return c == '=' || c == '#' || c == '-' || c == '/' || c == '\\';
  });
}

std::optional<Symbol> parse_atom_symbol(std::string_view body) {
  Symbol s;
  s.kind = SymbolKind::kAtom;
  std::size_t i = 0;
  if (i < body.size() && (body[i] == '=' || body[i] == '#' || body[i] == '/'
                          || body[i] == '\\')) {
    s.order = body[i] == '=' ? 2 : body[i] == '#' ? 3 : 1;
    ++i;
  }
  while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) ++i;

  if (i >= body.size() || !std::isupper(static_cast<unsigned char>(body[i]))) {
    return std::nullopt;
  }
  std::optional<int> z;
  if (i + 1 < body.size() && std::islower(static_cast<unsigned char>(body[i + 1]))) {
    z = atomic_number(body.substr(i, 2));
    if (z) i += 2;
  }
  if (!z) {
    z = atomic_number(body.substr(i, 1));
    if (!z) return std::nullopt;
    ++i;
  }
  s.element = *z;

  if (i < body.size() && body[i] == '@') {
    ++i;
    if (i < body.size() && body[i] == '@') ++i;
  }
  if (i < body.size() && body[i] == 'H') {
    ++i;
    s.fixed_h = true;
    s.h = 1;
    if (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) {
      s.h = 0;
      while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) {
        s.h = s.h * 10 + (body[i] - '0');
        if (s.h > 16) return std::nullopt;
        ++i;
      }
    }
  }
  if (i < body.size() && (body[i] == '+' || body[i] == '-')) {
    const char sign = body[i];
    const int unit = sign == '+' ? 1 : -1;
    ++i;
    s.fixed_h = true;
    if (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) {
      int n = 0;
      while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) {
        n = n * 10 + (body[i] - '0');
        if (n > 8) return std::nullopt;
        ++i;
      }
      s.charge = unit * n;
    } else {
      int n = 1;
      while (i < body.size() && body[i] == sign) {
        ++n;
        ++i;
      }
      s.charge = unit * n;
    }
  }
  if (i != body.size()) return std::nullopt;

  auto max = max_valence(s.element, s.charge);
  if (!max) return std::nullopt;
  s.capacity = *max - (s.fixed_h ? s.h : 0);
  if (s.capacity < 0) return std::nullopt;
  return s;
}

std::optional<Symbol> parse_symbol(std::string_view text) {
  if (text == ".") {
    Symbol s;
    s.kind = SymbolKind::kDot;
    s.text = ".";
    return s;
  }
  if (text.size() < 3 || text.front() != '[' || text.back() != ']') {
    return std::nullopt;
  }
  const std::string_view body = text.substr(1, text.size() - 2);
  std::optional<Symbol> out;

  if (body == "nop") {
    out.emplace();
    out->kind = SymbolKind::kNop;
  } else if (auto p = body.find("Branch"); p != std::string_view::npos) {
    std::string_view prefix = body.substr(0, p);
    std::string_view rest = body.substr(p + 6);
    if ((prefix.empty() || prefix == "=" || prefix == "#")
        && (rest == "1" || rest == "2" || rest == "3")) {
      out.emplace();
      out->kind = SymbolKind::kBranch;
      out->order = prefix_order(prefix);
      out->digits = rest[0] - '0';
    }
  } else if (auto q = body.find("Ring"); q != std::string_view::npos) {
    std::string_view prefix = body.substr(0, q);
    std::string_view rest = body.substr(q + 4);
    if (prefix.size() <= 2 && all_bond_chars(prefix)
        && (rest == "1" || rest == "2" || rest == "3")) {
      out.emplace();
      out->kind = SymbolKind::kRing;
      out->order = prefix_order(prefix);
      out->digits = rest[0] - '0';
    }
  } else {
    out = parse_atom_symbol(body);
  }
  if (out) out->text = std::string(text);
  return out;
}

// Decoder ------------------------------------------------------------------

struct PendingRing {
  int left;
  int right;
  int order;
};

class SelfiesDecoder {
public:
  explicit SelfiesDecoder(std::vector<Symbol> symbols): symbols_(std::move(symbols)) { }

  MolGraph decode() {
    while (pos_ < symbols_.size()) {
      // One fragment per '.'-separated run.
      std::size_t end = pos_;
      while (end < symbols_.size() && symbols_[end].kind != SymbolKind::kDot) ++end;
      frag_end_ = end;
      derive(std::nullopt, -1, static_cast<long>(symbols_.size()) + 1);
      pos_ = end + 1;
    }
    form_rings();

    std::vector<bool> implicit(graph_.num_atoms());
    for (int i = 0; i < graph_.num_atoms(); ++i) implicit[i] = !fixed_h_[i].first;
    for (int i = 0; i < graph_.num_atoms(); ++i) {
      if (fixed_h_[i].first) graph_.atom(i).explicit_h = fixed_h_[i].second;
    }
    return resolve_molecule(std::move(graph_), implicit);
  }

private:
  const Symbol *next() {
    if (pos_ >= frag_end_) return nullptr;
    return &symbols_[pos_++];
  }

  int read_index(int digits) {
    int q = 0;
    for (int k = 0; k < digits; ++k) {
      const Symbol *s = next();
      q = q * 16 + (s == nullptr ? 0 : index_digit(s->text));
    }
    return q;
  }

  int free_capacity(int atom) const {
    return capacity_[atom] - graph_.bond_order_sum(atom);
  }

  // Returns the number of symbols consumed.
  long derive(std::optional<int> init_state, int root, long max_derive) {
    std::optional<int> state = init_state;
    int prev = root;
    long n = 0;
    while ((!state || *state > 0) && n < max_derive) {
      const Symbol *sym = next();
      if (sym == nullptr) break;
      ++n;

      switch (sym->kind) {
      case SymbolKind::kNop:
      case SymbolKind::kDot:
        break;
      case SymbolKind::kBranch: {
        if (!state || *state <= 1) break;
        const int binit = std::min(*state - 1, sym->order);
        const int q = read_index(sym->digits);
        n += sym->digits;
        n += derive(binit, prev, q + 1);
        state = *state - binit;
        break;
      }
      case SymbolKind::kRing: {
        if (!state) break;
        const int order = std::min(sym->order, *state);
        const int q = read_index(sym->digits);
        n += sym->digits;
        const int left = std::max(0, prev - (q + 1));
        rings_.push_back({left, prev, order});
        state = *state - order;
        break;
      }
      case SymbolKind::kAtom: {
        if (!state) {
          prev = add_atom(*sym);
          state = sym->capacity;
          break;
        }
        const int order = std::min({sym->order, *state, sym->capacity});
        if (order == 0) break;  // atom without capacity cannot join the chain
        const int atom = add_atom(*sym);
        graph_.add_bond(prev, atom, static_cast<BondOrder>(order));
        state = sym->capacity - order;
        prev = atom;
        break;
      }
      }
    }
    return n;
  }

  int add_atom(const Symbol &s) {
    Atom a;
    a.element = s.element;
    a.formal_charge = s.charge;
    const int idx = graph_.add_atom(a);
    capacity_.push_back(s.capacity);
    fixed_h_.emplace_back(s.fixed_h, s.h);
    return idx;
  }

  void form_rings() {
    for (const PendingRing &r: rings_) {
      if (r.left == r.right) continue;
      const int lfree = free_capacity(r.left), rfree = free_capacity(r.right);
      if (lfree <= 0 || rfree <= 0) continue;
      const int order = std::min({r.order, lfree, rfree});
      const int existing = graph_.find_bond(r.left, r.right);
      if (existing >= 0) {
        const int cur = static_cast<int>(graph_.bond(existing).order);
        graph_.set_bond_order(existing,
                              static_cast<BondOrder>(std::min(cur + order, 3)));
      } else {
        graph_.add_bond(r.left, r.right, static_cast<BondOrder>(order));
      }
    }
  }

  std::vector<Symbol> symbols_;
  std::size_t pos_ = 0;
  std::size_t frag_end_ = 0;
  MolGraph graph_;
  std::vector<int> capacity_;
  std::vector<std::pair<bool, int>> fixed_h_;
  std::vector<PendingRing> rings_;
};

// Encoder ------------------------------------------------------------------

std::string bond_prefix(int order) {
  return order == 2 ? "=" : order == 3 ? "#" : "";
}

void append_index(std::vector<std::string> &out, int q, int digits) {
  for (int k = digits - 1; k >= 0; --k) {
    int d = (q >> (4 * k)) & 15;
    out.emplace_back(kIndexAlphabet[d]);
  }
}

int digits_for(int q) {
  if (q < 16) return 1;
  if (q < 256) return 2;
  if (q < 4096) return 3;
  throw MolError(MolErrorKind::kVocabulary,
                 "branch or ring span too long for SELFIES indices");
}

class SelfiesEncoder {
public:
  SelfiesEncoder(const MolGraph &kekule, const std::vector<int> &ranks)
      : g_(kekule), ranks_(ranks), visited_(g_.num_atoms(), false),
        tree_bond_(g_.num_bonds(), false), ring_seen_(g_.num_bonds(), false),
        children_(g_.num_atoms()), closings_(g_.num_atoms()),
        derive_index_(g_.num_atoms(), -1) { }

  std::string encode() {
    std::vector<int> order(g_.num_atoms());
    for (int i = 0; i < g_.num_atoms(); ++i) order[ranks_[i]] = i;

    std::string out;
    for (int root: order) {
      if (visited_[root]) continue;
      plan(root, -1);
      std::vector<std::string> tokens;
      emit(root, 0, tokens);
      if (!out.empty()) out += '.';
      for (const std::string &t: tokens) out += t;
    }
    return out;
  }

private:
  void plan(int v, int parent_bond) {
    visited_[v] = true;
    auto nbs = g_.neighbors(v);
    std::vector<Neighbor> sorted(nbs.begin(), nbs.end());
    std::sort(sorted.begin(), sorted.end(), [&](const Neighbor &x, const Neighbor &y) {
      return ranks_[x.atom] < ranks_[y.atom];
    });
    for (const Neighbor &nb: sorted) {
      if (nb.bond == parent_bond) continue;
      if (!visited_[nb.atom]) {
        tree_bond_[nb.bond] = true;
        children_[v].push_back(nb);
        plan(nb.atom, nb.bond);
      } else if (!tree_bond_[nb.bond] && !ring_seen_[nb.bond]) {
        ring_seen_[nb.bond] = true;
        // The atom reached later in the walk carries the ring symbol.
        closings_[v].push_back(nb);
      }
    }
  }

  std::string atom_token(int v, int incoming) const {
    const Atom &a = g_.atom(v);
    std::string t = "[" + bond_prefix(incoming);
    t += element_symbol(a.element);
    const int s = g_.bond_order_sum(v);
    bool need_h = a.formal_charge != 0;
    if (!need_h) {
      auto fill = fill_valence(a.element, 0, s);
      need_h = !fill || *fill - s != a.explicit_h;
    }
    if (need_h) {
      t += 'H';
      t += std::to_string(a.explicit_h);
    }
    if (a.formal_charge != 0) {
      t += a.formal_charge > 0 ? '+' : '-';
      t += std::to_string(std::abs(a.formal_charge));
    }
    t += ']';
    return t;
  }

  void emit(int v, int incoming, std::vector<std::string> &out) {
    const Atom &a = g_.atom(v);
    if (!max_valence(a.element, a.formal_charge)) {
      throw MolError(MolErrorKind::kVocabulary,
                     "element " + std::string(element_symbol(a.element))
                         + " with charge " + std::to_string(a.formal_charge)
                         + " is outside the SELFIES vocabulary");
    }
    derive_index_[v] = next_index_++;
    out.push_back(atom_token(v, incoming));

    for (const Neighbor &nb: closings_[v]) {
      const int order = static_cast<int>(g_.bond(nb.bond).order);
      const int q = derive_index_[v] - derive_index_[nb.atom] - 1;
      const int digits = digits_for(q);
      out.push_back("[" + bond_prefix(order) + "Ring" + std::to_string(digits) + "]");
      append_index(out, q, digits);
    }

    const auto &kids = children_[v];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const int order = static_cast<int>(g_.bond(kids[k].bond).order);
      if (k + 1 == kids.size()) {
        emit(kids[k].atom, order, out);
        break;
      }
      std::vector<std::string> branch;
      emit(kids[k].atom, order, branch);
      const int q = static_cast<int>(branch.size()) - 1;
      const int digits = digits_for(q);
      out.push_back("[" + bond_prefix(order) + "Branch" + std::to_string(digits)
                    + "]");
      append_index(out, q, digits);
      out.insert(out.end(), branch.begin(), branch.end());
    }
  }

  const MolGraph &g_;
  const std::vector<int> &ranks_;
  std::vector<bool> visited_;
  std::vector<bool> tree_bond_;
  std::vector<bool> ring_seen_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<Neighbor>> closings_;
  std::vector<int> derive_index_;
  int next_index_ = 0;
};

}  // namespace

std::vector<std::string> split_selfies(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '.') {
      out.emplace_back(".");
      ++i;
      continue;
    }
    if (text[i] != '[') {
      throw MolError(MolErrorKind::kUnknownToken,
                     "unexpected character outside a SELFIES symbol",
                     static_cast<std::ptrdiff_t>(out.size()));
    }
    const std::size_t close = text.find(']', i);
    if (close == std::string_view::npos) {
      throw MolError(MolErrorKind::kUnknownToken, "unterminated SELFIES symbol",
                     static_cast<std::ptrdiff_t>(out.size()));
    }
    out.emplace_back(text.substr(i, close - i + 1));
    i = close + 1;
  }
  return out;
}

bool is_selfies_symbol(std::string_view symbol) {
  return parse_symbol(symbol).has_value();
}

MolGraph parse_selfies(std::string_view text) {
  std::vector<std::string> tokens = split_selfies(text);
  std::vector<Symbol> symbols;
  symbols.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto s = parse_symbol(tokens[i]);
    if (!s) {
      throw MolError(MolErrorKind::kUnknownToken,
                     "unknown SELFIES symbol " + tokens[i],
                     static_cast<std::ptrdiff_t>(i));
    }
    symbols.push_back(std::move(*s));
  }
  return SelfiesDecoder(std::move(symbols)).decode();
}

std::string to_selfies(const MolGraph &g) {
  const std::vector<int> ranks = canonicalize(g).ranks;
  const MolGraph k = kekulize(g);
  return SelfiesEncoder(k, ranks).encode();
}

}  // namespace mollm
