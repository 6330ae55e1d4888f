//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/smiles.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "mollm/element.h"

namespace mollm {
namespace {

[[noreturn]] void syntax_error(std::string_view what, std::size_t pos) {
  throw MolError(MolErrorKind::kSyntax,
                 std::string(what) + " at index " + std::to_string(pos),
                 static_cast<std::ptrdiff_t>(pos));
}

struct RingOpen {
  int atom;
  std::optional<BondOrder> order;
  std::size_t pos;
};

class SmilesParser {
public:
  explicit SmilesParser(std::string_view text): text_(text) { }

  MolGraph parse() {
    if (text_.empty()) syntax_error("empty SMILES", 0);

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(') {
        if (prev_ < 0) syntax_error("branch without a preceding atom", pos_);
        if (pending_) syntax_error("bond before branch", pos_);
        branch_stack_.push_back(prev_);
        branch_pos_.push_back(pos_);
        ++pos_;
        branch_opened_ = true;
      } else if (c == ')') {
        if (branch_stack_.empty()) syntax_error("unmatched ')'", pos_);
        if (branch_opened_ || pending_) syntax_error("empty branch", pos_);
        prev_ = branch_stack_.back();
        branch_stack_.pop_back();
        branch_pos_.pop_back();
        ++pos_;
      } else if (c == '.') {
        if (prev_ < 0 || pending_ || branch_opened_) {
          syntax_error("unexpected '.'", pos_);
        }
        if (!branch_stack_.empty()) syntax_error("'.' inside a branch", pos_);
        prev_ = -1;
        ++pos_;
      } else if (is_bond_char(c)) {
        if (prev_ < 0) syntax_error("bond without a preceding atom", pos_);
        if (pending_) syntax_error("two consecutive bonds", pos_);
        pending_ = bond_from_char(c);
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '%') {
        ring_closure();
      } else {
        atom();
      }
    }

    if (pending_) syntax_error("dangling bond", text_.size());
    if (!branch_stack_.empty()) syntax_error("unclosed branch", text_.size());
    if (!rings_.empty()) {
      const RingOpen &r = rings_.begin()->second;
      throw MolError(MolErrorKind::kRingClosure,
                     "unclosed ring bond " + std::to_string(rings_.begin()->first)
                         + " opened at index " + std::to_string(r.pos),
                     static_cast<std::ptrdiff_t>(r.pos));
    }

    return resolve_molecule(std::move(raw_), implicit_h_);
  }

private:
  static bool is_bond_char(char c) {
    return c == '-' || c == '=' || c == '#' || c == ':' || c == '/' || c == '\\'
           || c == '$';
  }

  BondOrder bond_from_char(char c) const {
    switch (c) {
    case '=': return BondOrder::kDouble;
    case '#': return BondOrder::kTriple;
    case ':': return BondOrder::kAromatic;
    case '$': syntax_error("quadruple bonds are not supported", pos_);
    default: return BondOrder::kSingle;
    }
  }

  void ring_closure() {
    const std::size_t start = pos_;
    if (prev_ < 0) syntax_error("ring bond without a preceding atom", pos_);
    int num;
    if (text_[pos_] == '%') {
      if (pos_ + 2 >= text_.size() || !std::isdigit(text_[pos_ + 1])
          || !std::isdigit(text_[pos_ + 2])) {
        syntax_error("'%' must be followed by two digits", pos_);
      }
      num = (text_[pos_ + 1] - '0') * 10 + (text_[pos_ + 2] - '0');
      pos_ += 3;
    } else {
      num = text_[pos_] - '0';
      ++pos_;
    }

    auto it = rings_.find(num);
    if (it == rings_.end()) {
      rings_[num] = {prev_, pending_, start};
      pending_.reset();
      return;
    }

    const RingOpen open = it->second;
    rings_.erase(it);
    if (open.atom == prev_) {
      throw MolError(MolErrorKind::kRingClosure,
                     "ring bond " + std::to_string(num) + " closes on itself",
                     static_cast<std::ptrdiff_t>(start));
    }
    if (open.order && pending_ && *open.order != *pending_) {
      throw MolError(MolErrorKind::kRingClosure,
                     "conflicting bond orders for ring bond "
                         + std::to_string(num),
                     static_cast<std::ptrdiff_t>(start));
    }
    std::optional<BondOrder> order = pending_ ? pending_ : open.order;
    pending_.reset();
    if (raw_.find_bond(open.atom, prev_) >= 0) {
      throw MolError(MolErrorKind::kRingClosure,
                     "ring bond " + std::to_string(num)
                         + " duplicates an existing bond",
                     static_cast<std::ptrdiff_t>(start));
    }
    raw_.add_bond(open.atom, prev_, order.value_or(default_order(open.atom, prev_)));
  }

  BondOrder default_order(int a, int b) const {
    return raw_.atom(a).aromatic && raw_.atom(b).aromatic ? BondOrder::kAromatic
                                                          : BondOrder::kSingle;
  }

  void atom() {
    const std::size_t start = pos_;
    Atom a;
    bool implicit = true;
    if (text_[pos_] == '[') {
      bracket_atom(a);
      implicit = false;
    } else {
      organic_atom(a);
    }
    if (a.aromatic && !may_be_aromatic(a.element)) {
      syntax_error("element cannot be aromatic", start);
    }

    const int idx = raw_.add_atom(a);
    implicit_h_.push_back(implicit);
    if (prev_ >= 0) {
      raw_.add_bond(prev_, idx, pending_.value_or(default_order(prev_, idx)));
    }
    pending_.reset();
    prev_ = idx;
    branch_opened_ = false;
  }

  void organic_atom(Atom &a) {
    const char c = text_[pos_];
    const char next = pos_ + 1 < text_.size() ? text_[pos_ + 1] : '\0';
    if (c == 'C' && next == 'l') {
      a.element = 17;
      pos_ += 2;
      return;
    }
    if (c == 'B' && next == 'r') {
      a.element = 35;
      pos_ += 2;
      return;
    }
    switch (c) {
    case 'B': a.element = 5; break;
    case 'C': a.element = 6; break;
    case 'N': a.element = 7; break;
    case 'O': a.element = 8; break;
    case 'P': a.element = 15; break;
    case 'S': a.element = 16; break;
    case 'F': a.element = 9; break;
    case 'I': a.element = 53; break;
    case 'b': a.element = 5; a.aromatic = true; break;
    case 'c': a.element = 6; a.aromatic = true; break;
    case 'n': a.element = 7; a.aromatic = true; break;
    case 'o': a.element = 8; a.aromatic = true; break;
    case 'p': a.element = 15; a.aromatic = true; break;
    case 's': a.element = 16; a.aromatic = true; break;
    default: syntax_error(std::string("unexpected character '") + c + "'", pos_);
    }
    ++pos_;
  }

  bool at(char c) const { return pos_ < text_.size() && text_[pos_] == c; }

  bool at_digit() const {
    return pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]));
  }

  int read_number() {
    int v = 0;
    while (at_digit()) {
      v = v * 10 + (text_[pos_] - '0');
      if (v > 1'000'000) syntax_error("number too large", pos_);
      ++pos_;
    }
    return v;
  }

  void bracket_atom(Atom &a) {
    ++pos_;  // '['
    read_number();  // isotope, discarded

    const std::size_t sym_pos = pos_;
    if (pos_ >= text_.size()) syntax_error("unterminated bracket atom", pos_);
    const char c = text_[pos_];
    if (std::islower(static_cast<unsigned char>(c))) {
      // Aromatic: se, as, te, or a single lowercase organic letter.
      std::string two(text_.substr(pos_, 2));
      if (two == "se" || two == "as" || two == "te") {
        two[0] = static_cast<char>(std::toupper(two[0]));
        a.element = *atomic_number(two);
        pos_ += 2;
      } else {
        std::string one(1, static_cast<char>(std::toupper(c)));
        auto z = atomic_number(one);
        if (!z || !may_be_aromatic(*z)) syntax_error("unknown aromatic symbol", pos_);
        a.element = *z;
        ++pos_;
      }
      a.aromatic = true;
    } else if (std::isupper(static_cast<unsigned char>(c))) {
      std::optional<int> z;
      if (pos_ + 1 < text_.size()
          && std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
        z = atomic_number(text_.substr(pos_, 2));
        if (z) pos_ += 2;
      }
      if (!z) {
        z = atomic_number(text_.substr(pos_, 1));
        if (!z) syntax_error("unknown element symbol", sym_pos);
        ++pos_;
      }
      a.element = *z;
    } else {
      syntax_error("expected element symbol", pos_);
    }

    // Chirality, discarded.
    if (at('@')) {
      ++pos_;
      if (at('@')) {
        ++pos_;
      } else {
        static constexpr std::string_view kClasses[] = {"TH", "AL", "SP", "TB", "OH"};
        for (std::string_view cls: kClasses) {
          if (text_.substr(pos_, 2) == cls) {
            pos_ += 2;
            read_number();
            break;
          }
        }
      }
    }

    if (at('H')) {
      ++pos_;
      a.explicit_h = at_digit() ? read_number() : 1;
    }

    if (at('+') || at('-')) {
      const char sign = text_[pos_];
      const int s = sign == '+' ? 1 : -1;
      ++pos_;
      if (at_digit()) {
        a.formal_charge = s * read_number();
      } else {
        int n = 1;
        while (at(sign)) {
          ++n;
          ++pos_;
        }
        a.formal_charge = s * n;
      }
    }

    if (at(':')) {
      ++pos_;
      if (!at_digit()) syntax_error("expected atom class", pos_);
      read_number();
    }

    if (!at(']')) syntax_error("expected ']'", pos_);
    ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  MolGraph raw_;
  std::vector<bool> implicit_h_;
  int prev_ = -1;
  bool branch_opened_ = false;
  std::optional<BondOrder> pending_;
  std::vector<int> branch_stack_;
  std::vector<std::size_t> branch_pos_;
  std::map<int, RingOpen> rings_;
};

// Writer -------------------------------------------------------------------

// Whether the atom written without brackets parses back to the same charge,
// hydrogen count and Kekule role.
bool bare_form_matches(const MolGraph &g, int i) {
  const Atom &a = g.atom(i);
  if (!is_organic_subset(a.element) || a.formal_charge != 0) return false;

  const int s = g.bond_order_sum(i);
  if (!a.aromatic) {
    auto fill = fill_valence(a.element, 0, s);
    return fill && *fill - s == a.explicit_h;
  }

  auto fixed = fill_valence(a.element, 0, s + a.explicit_h);
  auto fill = fill_valence(a.element, 0, s);
  if (!fixed || !fill) return false;
  const bool needy_actual = *fixed - (s + a.explicit_h) >= 1;
  const bool needy_bare = *fill - s >= 1;
  if (needy_actual != needy_bare) return false;
  int bare_h = 0;
  if (needy_bare) {
    auto f2 = fill_valence(a.element, 0, s + 1);
    if (!f2) return false;
    bare_h = *f2 - (s + 1);
  }
  return bare_h == a.explicit_h;
}

std::string atom_text(const MolGraph &g, int i) {
  const Atom &a = g.atom(i);
  std::string sym(element_symbol(a.element));
  if (a.aromatic) {
    std::transform(sym.begin(), sym.end(), sym.begin(),
                   [](unsigned char c) { return std::tolower(c); });
  }
  if (bare_form_matches(g, i)) return sym;

  std::string out = "[" + sym;
  if (a.explicit_h > 0) {
    out += 'H';
    if (a.explicit_h > 1) out += std::to_string(a.explicit_h);
  }
  if (a.formal_charge != 0) {
    out += a.formal_charge > 0 ? '+' : '-';
    const int mag = std::abs(a.formal_charge);
    if (mag > 1) out += std::to_string(mag);
  }
  out += ']';
  return out;
}

std::string bond_text(const MolGraph &g, int bond) {
  const Bond &b = g.bond(bond);
  switch (b.order) {
  case BondOrder::kDouble: return "=";
  case BondOrder::kTriple: return "#";
  case BondOrder::kAromatic: return "";
  case BondOrder::kSingle:
    return g.atom(b.a).aromatic && g.atom(b.b).aromatic ? "-" : "";
  }
  return "";
}

struct RingBond {
  int bond;
  int partner;
  bool opening;
};

class SmilesWriter {
public:
  SmilesWriter(const MolGraph &g, std::span<const int> ranks)
      : g_(g), ranks_(ranks.begin(), ranks.end()), visited_(g.num_atoms(), false),
        tree_bond_(g.num_bonds(), false), ring_seen_(g.num_bonds(), false),
        children_(g.num_atoms()), rings_(g.num_atoms()) { }

  std::string write() {
    std::vector<int> order(g_.num_atoms());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return ranks_[x] < ranks_[y]; });

    std::string out;
    for (int root: order) {
      if (visited_[root]) continue;
      plan(root, -1);
      if (!out.empty()) out += '.';
      emit(root, out);
    }
    return out;
  }

private:
  std::vector<Neighbor> sorted_neighbors(int v) const {
    auto nbs = g_.neighbors(v);
    std::vector<Neighbor> out(nbs.begin(), nbs.end());
    std::sort(out.begin(), out.end(), [&](const Neighbor &x, const Neighbor &y) {
      return ranks_[x.atom] < ranks_[y.atom];
    });
    return out;
  }

  void plan(int v, int parent_bond) {
    visited_[v] = true;
    for (const Neighbor &nb: sorted_neighbors(v)) {
      if (nb.bond == parent_bond) continue;
      if (!visited_[nb.atom]) {
        tree_bond_[nb.bond] = true;
        children_[v].push_back(nb);
        plan(nb.atom, nb.bond);
      } else if (!tree_bond_[nb.bond] && !ring_seen_[nb.bond]) {
        ring_seen_[nb.bond] = true;
        rings_[nb.atom].push_back({nb.bond, v, true});
        rings_[v].push_back({nb.bond, nb.atom, false});
      }
    }
  }

  int take_digit() {
    int d = 1;
    while (digit_used_.count(d) != 0) ++d;
    digit_used_.insert({d, true});
    return d;
  }

  static std::string digit_text(int d) {
    if (d < 10) return std::to_string(d);
    return "%" + std::to_string(d);
  }

  void emit(int v, std::string &out) {
    out += atom_text(g_, v);

    // Closings first, then openings, each in partner rank order.
    std::vector<RingBond> &rb = rings_[v];
    std::stable_sort(rb.begin(), rb.end(), [&](const RingBond &x, const RingBond &y) {
      if (x.opening != y.opening) return !x.opening;
      return ranks_[x.partner] < ranks_[y.partner];
    });
    for (const RingBond &r: rb) {
      if (r.opening) {
        const int d = take_digit();
        bond_digit_[r.bond] = d;
        out += bond_text(g_, r.bond);
        out += digit_text(d);
      } else {
        const int d = bond_digit_.at(r.bond);
        digit_used_.erase(d);
        out += digit_text(d);
      }
    }

    const auto &kids = children_[v];
    for (std::size_t k = 0; k < kids.size(); ++k) {
      const bool last = k + 1 == kids.size();
      if (!last) out += '(';
      out += bond_text(g_, kids[k].bond);
      emit(kids[k].atom, out);
      if (!last) out += ')';
    }
  }

  const MolGraph &g_;
  std::vector<int> ranks_;
  std::vector<bool> visited_;
  std::vector<bool> tree_bond_;
  std::vector<bool> ring_seen_;
  std::vector<std::vector<Neighbor>> children_;
  std::vector<std::vector<RingBond>> rings_;
  std::map<int, bool> digit_used_;
  std::map<int, int> bond_digit_;
};

}  // namespace

MolGraph parse_smiles(std::string_view text) {
  return SmilesParser(text).parse();
}

std::string write_smiles(const MolGraph &g, std::span<const int> ranks) {
  return SmilesWriter(g, ranks).write();
}

std::string write_smiles(const MolGraph &g) {
  std::vector<int> ranks(g.num_atoms());
  std::iota(ranks.begin(), ranks.end(), 0);
  return write_smiles(g, ranks);
}

}  // namespace mollm
