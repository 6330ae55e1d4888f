//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/substruct.h"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mollm/element.h"
#include "mollm/smiles.h"

#ifndef MOLLM_DATA_DIR
#define MOLLM_DATA_DIR "data"
#endif

namespace mollm {
namespace {

[[noreturn]] void pattern_error(std::string_view text, std::string_view what,
                                std::size_t pos) {
  throw MolError(MolErrorKind::kSyntax,
                 "pattern '" + std::string(text) + "': " + std::string(what)
                     + " at index " + std::to_string(pos),
                 static_cast<std::ptrdiff_t>(pos));
}

class PatternParser {
public:
  explicit PatternParser(std::string_view text): text_(text) { }

  void parse(std::vector<AtomQuery> &atoms, std::vector<QueryBond> &bonds) {
    if (text_.empty()) pattern_error(text_, "empty pattern", 0);
    constexpr int kNone = -1;
    int prev = -1;
    int pending = kNone;
    std::vector<int> branches;
    std::map<int, std::pair<int, int>> rings;

    auto order_or_default = [](int code) {
      return code == kNone ? BondQuery::kSingleOrAromatic : static_cast<BondQuery>(code);
    };

    while (pos_ < text_.size()) {
      const char c = text_[pos_];
      if (c == '(') {
        if (prev < 0) pattern_error(text_, "branch without atom", pos_);
        branches.push_back(prev);
        ++pos_;
      } else if (c == ')') {
        if (branches.empty()) pattern_error(text_, "unmatched ')'", pos_);
        prev = branches.back();
        branches.pop_back();
        ++pos_;
      } else if (c == '-' || c == '=' || c == '#' || c == ':' || c == '~') {
        if (prev < 0 || pending != kNone) pattern_error(text_, "misplaced bond", pos_);
        const BondQuery q = c == '-'   ? BondQuery::kSingle
                            : c == '=' ? BondQuery::kDouble
                            : c == '#' ? BondQuery::kTriple
                            : c == ':' ? BondQuery::kAromatic
                                       : BondQuery::kAny;
        pending = static_cast<int>(q);
        ++pos_;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        if (prev < 0) pattern_error(text_, "ring bond without atom", pos_);
        const int num = c - '0';
        ++pos_;
        auto it = rings.find(num);
        if (it == rings.end()) {
          rings[num] = {prev, pending};
        } else {
          auto [other, order] = it->second;
          rings.erase(it);
          if (other == prev) pattern_error(text_, "ring bond to itself", pos_ - 1);
          bonds.push_back({other, prev, order_or_default(pending != kNone ? pending : order)});
        }
        pending = kNone;
      } else {
        AtomQuery q = c == '[' ? bracket() : simple();
        atoms.push_back(std::move(q));
        const int idx = static_cast<int>(atoms.size()) - 1;
        if (prev >= 0) bonds.push_back({prev, idx, order_or_default(pending)});
        pending = kNone;
        prev = idx;
      }
    }
    if (pending != kNone) pattern_error(text_, "dangling bond", text_.size());
    if (!branches.empty()) pattern_error(text_, "unclosed branch", text_.size());
    if (!rings.empty()) pattern_error(text_, "unclosed ring bond", text_.size());
  }

private:
  AtomQuery simple() {
    AtomQuery q;
    q.alternatives.push_back(alternative(true));
    return q;
  }

  // One atom primitive: organic symbol, lowercase aromatic symbol, *, a, A,
  // or (in brackets) any element symbol or #n.
  AtomAlternative alternative(bool organic_only) {
    AtomAlternative alt;
    const char c = text_[pos_];
    if (c == '*') {
      ++pos_;
      return alt;
    }
    if (c == 'a' && !(pos_ + 1 < text_.size() && text_[pos_ + 1] == 's')) {
      alt.aromatic = true;
      ++pos_;
      return alt;
    }
    if (c == 'A' && !(pos_ + 1 < text_.size() && std::islower(text_[pos_ + 1]))) {
      alt.aromatic = false;
      ++pos_;
      return alt;
    }
    if (c == '#') {
      ++pos_;
      const std::size_t start = pos_;
      int z = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        z = z * 10 + (text_[pos_++] - '0');
      }
      if (pos_ == start || z < 1 || z > kMaxAtomicNumber) {
        pattern_error(text_, "bad atomic number", start);
      }
      alt.element = z;
      return alt;
    }
    if (std::islower(static_cast<unsigned char>(c))) {
      std::string sym(1, static_cast<char>(std::toupper(c)));
      std::size_t len = 1;
      if (!organic_only && pos_ + 1 < text_.size()
          && std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
        std::string two = sym + text_[pos_ + 1];
        if (auto z = atomic_number(two); z && may_be_aromatic(*z)) {
          sym = two;
          len = 2;
        }
      }
      auto z = atomic_number(sym);
      if (!z || !may_be_aromatic(*z)) pattern_error(text_, "bad aromatic symbol", pos_);
      alt.element = *z;
      alt.aromatic = true;
      pos_ += len;
      return alt;
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::optional<int> z;
      std::size_t len = 1;
      if (pos_ + 1 < text_.size() && std::islower(static_cast<unsigned char>(text_[pos_ + 1]))) {
        z = atomic_number(text_.substr(pos_, 2));
        if (z && organic_only && *z != 17 && *z != 35) z.reset();
        if (z) len = 2;
      }
      if (!z) z = atomic_number(text_.substr(pos_, 1));
      if (!z || (organic_only && !is_organic_subset(*z))) {
        pattern_error(text_, "bad element symbol", pos_);
      }
      alt.element = *z;
      alt.aromatic = false;
      pos_ += len;
      return alt;
    }
    pattern_error(text_, "unexpected character", pos_);
  }

  int number_or(int fallback) {
    if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      return fallback;
    }
    int v = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + (text_[pos_++] - '0');
    }
    return v;
  }

  AtomQuery bracket() {
    AtomQuery q;
    ++pos_;
    while (true) {
      if (pos_ >= text_.size()) pattern_error(text_, "unterminated bracket", pos_);
      q.alternatives.push_back(alternative(false));
      if (pos_ < text_.size() && text_[pos_] == ',') {
        ++pos_;
        continue;
      }
      break;
    }
    while (pos_ < text_.size() && (text_[pos_] == ';' || text_[pos_] == '&')) {
      ++pos_;
      AtomConstraint con;
      if (pos_ < text_.size() && text_[pos_] == '!') {
        con.negated = true;
        ++pos_;
      }
      if (pos_ >= text_.size()) pattern_error(text_, "unterminated bracket", pos_);
      const char c = text_[pos_++];
      switch (c) {
      case 'H':
        con.kind = AtomConstraint::kTotalH;
        con.value = number_or(1);
        break;
      case 'D':
        con.kind = AtomConstraint::kDegree;
        con.value = number_or(1);
        break;
      case 'X':
        con.kind = AtomConstraint::kConnections;
        con.value = number_or(1);
        break;
      case 'R':
        con.kind = AtomConstraint::kInRing;
        con.value = 1;
        break;
      case '+':
      case '-':
        con.kind = AtomConstraint::kCharge;
        con.value = (c == '+' ? 1 : -1) * number_or(1);
        break;
      default:
        pattern_error(text_, "unknown constraint", pos_ - 1);
      }
      q.constraints.push_back(con);
    }
    if (pos_ >= text_.size() || text_[pos_] != ']') {
      pattern_error(text_, "expected ']'", pos_);
    }
    ++pos_;
    return q;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

bool atom_matches(const AtomQuery &q, const MolGraph &g, int v,
                  const std::vector<bool> &in_ring) {
  const Atom &a = g.atom(v);
  const bool alt_ok = std::any_of(
      q.alternatives.begin(), q.alternatives.end(), [&](const AtomAlternative &alt) {
        if (alt.element != 0 && alt.element != a.element) return false;
        if (alt.aromatic && *alt.aromatic != a.aromatic) return false;
        return true;
      });
  if (!alt_ok) return false;

  for (const AtomConstraint &c: q.constraints) {
    bool ok = false;
    switch (c.kind) {
    case AtomConstraint::kTotalH: ok = a.explicit_h == c.value; break;
    case AtomConstraint::kDegree: ok = g.heavy_degree(v) == c.value; break;
    case AtomConstraint::kConnections:
      ok = g.degree(v) + a.explicit_h == c.value;
      break;
    case AtomConstraint::kCharge: ok = a.formal_charge == c.value; break;
    case AtomConstraint::kInRing: ok = in_ring[v]; break;
    }
    if (ok == c.negated) return false;
  }
  return true;
}

bool bond_matches(BondQuery q, BondOrder o) {
  switch (q) {
  case BondQuery::kSingleOrAromatic:
    return o == BondOrder::kSingle || o == BondOrder::kAromatic;
  case BondQuery::kSingle: return o == BondOrder::kSingle;
  case BondQuery::kDouble: return o == BondOrder::kDouble;
  case BondQuery::kTriple: return o == BondOrder::kTriple;
  case BondQuery::kAromatic: return o == BondOrder::kAromatic;
  case BondQuery::kAny: return true;
  }
  return false;
}

class Matcher {
public:
  Matcher(const Pattern &p, const MolGraph &g, bool first_only)
      : p_(p), g_(g), first_only_(first_only), in_ring_(ring_atoms(g)),
        map_(p.num_atoms(), -1), used_(g.num_atoms(), false) {
    // Breadth-first order so every atom after the first has a mapped parent.
    const int n = p.num_atoms();
    std::vector<std::vector<std::pair<int, BondQuery>>> adj(n);
    for (const QueryBond &b: p.bonds()) {
      adj[b.a].emplace_back(b.b, b.order);
      adj[b.b].emplace_back(b.a, b.order);
    }
    std::vector<bool> seen(n, false);
    parent_.assign(n, -1);
    order_.push_back(0);
    seen[0] = true;
    for (std::size_t i = 0; i < order_.size(); ++i) {
      for (auto [u, o]: adj[order_[i]]) {
        if (seen[u]) continue;
        seen[u] = true;
        parent_[u] = order_[i];
        order_.push_back(u);
      }
    }
    // Constraints checked when the later of the two atoms is placed.
    std::vector<int> position(n);
    for (int i = 0; i < n; ++i) position[order_[i]] = i;
    back_.resize(n);
    for (const QueryBond &b: p.bonds()) {
      const int later = position[b.a] > position[b.b] ? b.a : b.b;
      back_[later].push_back(b);
    }
  }

  std::vector<std::vector<int>> run() {
    if (p_.num_atoms() == 0 || g_.num_atoms() == 0) return {};
    for (int v = 0; v < g_.num_atoms() && !done(); ++v) {
      try_place(0, v);
    }
    return std::move(results_);
  }

private:
  bool done() const { return first_only_ && !results_.empty(); }

  void try_place(std::size_t depth, int v) {
    const int qa = order_[depth];
    if (used_[v] || !atom_matches(p_.atoms()[qa], g_, v, in_ring_)) return;
    for (const QueryBond &b: back_[qa]) {
      const int other = b.a == qa ? b.b : b.a;
      const int bond = g_.find_bond(v, map_[other]);
      if (bond < 0 || !bond_matches(b.order, g_.bond(bond).order)) return;
    }
    map_[qa] = v;
    used_[v] = true;
    if (depth + 1 == order_.size()) {
      results_.push_back(map_);
    } else {
      const int next = order_[depth + 1];
      for (const Neighbor &nb: g_.neighbors(map_[parent_[next]])) {
        try_place(depth + 1, nb.atom);
        if (done()) break;
      }
    }
    used_[v] = false;
    map_[qa] = -1;
  }

  const Pattern &p_;
  const MolGraph &g_;
  bool first_only_;
  std::vector<bool> in_ring_;
  std::vector<int> order_;
  std::vector<int> parent_;
  std::vector<std::vector<QueryBond>> back_;
  std::vector<int> map_;
  std::vector<bool> used_;
  std::vector<std::vector<int>> results_;
};

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

Pattern Pattern::parse(std::string_view text, std::string name) {
  Pattern p;
  p.name_ = std::move(name);
  p.text_ = std::string(text);
  PatternParser(text).parse(p.atoms_, p.bonds_);
  if (p.num_atoms() > kMaxPatternAtoms) {
    pattern_error(text, "more than 16 atoms", 0);
  }
  // Connectivity.
  std::vector<int> comp(p.num_atoms());
  for (int i = 0; i < p.num_atoms(); ++i) comp[i] = i;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const QueryBond &b: p.bonds_) {
      const int m = std::min(comp[b.a], comp[b.b]);
      if (comp[b.a] != m || comp[b.b] != m) {
        comp[b.a] = comp[b.b] = m;
        changed = true;
      }
    }
  }
  if (std::any_of(comp.begin(), comp.end(), [](int c) { return c != 0; })) {
    pattern_error(text, "pattern is not connected", 0);
  }
  return p;
}

MolGraph Pattern::template_graph() const {
  MolGraph raw;
  std::vector<bool> implicit_h;
  for (const AtomQuery &q: atoms_) {
    Atom a;
    const AtomAlternative &alt = q.alternatives.front();
    a.element = alt.element == 0 ? 6 : alt.element;
    a.aromatic = alt.aromatic.value_or(false);
    bool implicit = true;
    for (const AtomConstraint &c: q.constraints) {
      if (c.negated) continue;
      if (c.kind == AtomConstraint::kCharge) a.formal_charge = c.value;
      if (c.kind == AtomConstraint::kTotalH) {
        a.explicit_h = c.value;
        implicit = false;
      }
    }
    raw.add_atom(a);
    implicit_h.push_back(implicit);
  }
  for (const QueryBond &b: bonds_) {
    BondOrder o = BondOrder::kSingle;
    switch (b.order) {
    case BondQuery::kDouble: o = BondOrder::kDouble; break;
    case BondQuery::kTriple: o = BondOrder::kTriple; break;
    case BondQuery::kAromatic: o = BondOrder::kAromatic; break;
    case BondQuery::kSingleOrAromatic:
      if (raw.atom(b.a).aromatic && raw.atom(b.b).aromatic) o = BondOrder::kAromatic;
      break;
    default: break;
    }
    raw.add_bond(b.a, b.b, o);
  }
  // Aromatic atoms outside any ring of the pattern are written aliphatic.
  const std::vector<bool> in_ring = ring_atoms(raw);
  for (int i = 0; i < raw.num_atoms(); ++i) {
    if (!in_ring[i]) raw.atom(i).aromatic = false;
  }
  return resolve_molecule(std::move(raw), implicit_h);
}

MolGraph key_template(const KeyEntry &entry) {
  if (!entry.template_smiles.empty()) return parse_smiles(entry.template_smiles);
  return entry.pattern.template_graph();
}

std::vector<std::vector<int>> match_all(const Pattern &p, const MolGraph &g) {
  return Matcher(p, g, false).run();
}

std::vector<std::vector<int>> match(const Pattern &p, const MolGraph &g) {
  std::vector<std::vector<int>> all = match_all(p, g);
  std::set<std::vector<int>> seen;
  std::vector<std::vector<int>> out;
  for (auto &m: all) {
    std::vector<int> key = m;
    std::sort(key.begin(), key.end());
    if (seen.insert(std::move(key)).second) out.push_back(std::move(m));
  }
  return out;
}

bool has_match(const Pattern &p, const MolGraph &g) {
  return !Matcher(p, g, true).run().empty();
}

KeyTable::KeyTable(std::string version, std::vector<KeyEntry> entries)
    : version_(std::move(version)), entries_(std::move(entries)) {
  for (int i = 0; i < width(); ++i) {
    if (entries_[i].key_index != i) {
      throw std::invalid_argument("key table indices must be dense from 0");
    }
  }
}

KeyTable KeyTable::parse(std::string_view content, const std::string &source) {
  std::istringstream in {std::string(content)};
  std::string line, version;
  std::vector<KeyEntry> entries;
  int lineno = 0;
  auto fail = [&](const std::string &what) {
    throw std::runtime_error(source + ":" + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      if (version.empty()) version = trim(std::string_view(t).substr(1));
      continue;
    }
    if (version.empty()) fail("missing version header");
    std::vector<std::string> cols;
    std::size_t start = 0;
    while (true) {
      std::size_t tab = t.find('\t', start);
      cols.push_back(t.substr(start, tab == std::string::npos ? std::string::npos
                                                              : tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 3 && cols.size() != 4) {
      fail("expected key_index<TAB>name<TAB>pattern[<TAB>template]");
    }
    int idx = 0;
    try {
      idx = std::stoi(cols[0]);
    } catch (const std::exception &) {
      fail("bad key index '" + cols[0] + "'");
    }
    if (idx != static_cast<int>(entries.size())) fail("key indices must be dense from 0");
    try {
      KeyEntry e {idx, cols[1], Pattern::parse(trim(cols[2]), cols[1]),
                  cols.size() == 4 ? trim(cols[3]) : std::string()};
      if (!e.template_smiles.empty()) parse_smiles(e.template_smiles);
      entries.push_back(std::move(e));
    } catch (const MolError &e) {
      fail(e.what());
    }
  }
  if (version.empty()) fail("missing version header");
  return KeyTable(version, std::move(entries));
}

KeyTable KeyTable::load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open key table " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path);
}

KeyProfile maccs_profile(const MolGraph &g, const KeyTable &table) {
  KeyProfile out;
  out.bits = Fingerprint(table.width());
  for (const KeyEntry &e: table.entries()) {
    if (has_match(e.pattern, g)) {
      out.bits.set(e.key_index);
      out.present.push_back(e.key_index);
    } else {
      out.absent.push_back(e.key_index);
    }
  }
  return out;
}

Fingerprint maccs_keys(const MolGraph &g, const KeyTable &table) {
  return maccs_profile(g, table).bits;
}

std::string data_dir() {
  if (const char *env = std::getenv("MOLLM_DATA_DIR"); env != nullptr && *env) {
    return env;
  }
  return MOLLM_DATA_DIR;
}

const KeyTable &default_key_table() {
  static const KeyTable table = KeyTable::load(data_dir() + "/maccs_keys.tsv");
  return table;
}

const KeyTable &default_group_table() {
  static const KeyTable table = [] {
    KeyTable t = KeyTable::load(data_dir() + "/functional_groups.tsv");
    if (t.width() != kNumFunctionalGroups) {
      throw std::runtime_error("functional-group table must have 72 entries");
    }
    return t;
  }();
  return table;
}

std::vector<std::uint8_t> functional_groups(const MolGraph &g, const KeyTable &table) {
  std::vector<std::uint8_t> bits(table.width(), 0);
  for (const KeyEntry &e: table.entries()) {
    bits[e.key_index] = has_match(e.pattern, g) ? 1 : 0;
  }
  return bits;
}

std::vector<std::uint8_t> functional_groups(const MolGraph &g) {
  return functional_groups(g, default_group_table());
}

}  // namespace mollm
