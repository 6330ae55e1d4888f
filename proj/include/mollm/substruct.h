//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_SUBSTRUCT_H_
#define MOLLM_SUBSTRUCT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mollm/fingerprint.h"
#include "mollm/molgraph.h"

namespace mollm {

inline constexpr int kMaxPatternAtoms = 16;

struct AtomAlternative {
  int element = 0;  // 0: any element
  std::optional<bool> aromatic;
};

struct AtomConstraint {
  enum Kind : std::uint8_t { kTotalH, kDegree, kConnections, kCharge, kInRing };
  Kind kind;
  int value = 0;
  bool negated = false;
};

/// An atom matches when it satisfies any alternative and every constraint.
/// kDegree counts heavy neighbours; kConnections also counts hydrogens.
struct AtomQuery {
  std::vector<AtomAlternative> alternatives;
  std::vector<AtomConstraint> constraints;
};

enum class BondQuery : std::uint8_t {
  kSingleOrAromatic,
  kSingle,
  kDouble,
  kTriple,
  kAromatic,
  kAny,
};

struct QueryBond {
  int a;
  int b;
  BondQuery order;
};

/// A small connected query graph written in a SMARTS subset:
///
///   atoms    C c N n ... (aliphatic/aromatic organic atoms), * (any),
///            A (any aliphatic), a (any aromatic), and bracket atoms
///            [alt,alt;constraint;...] where each alternative is a symbol,
///            #n, *, a or A and constraints are Hn, Dn, Xn, +n, -n, +0, R,
///            each optionally negated with '!'
///   bonds    - = # : ~ (implicit bond: single or aromatic)
///   plus branches and ring-closure digits.
class Pattern {
public:
  static Pattern parse(std::string_view text, std::string name = {});

  const std::string &name() const { return name_; }
  const std::string &text() const { return text_; }
  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  const std::vector<AtomQuery> &atoms() const { return atoms_; }
  const std::vector<QueryBond> &bonds() const { return bonds_; }

  /// Concrete molecule used when the pattern is attached to a graph: the
  /// first alternative of each atom, wildcards as carbon, charges kept,
  /// hydrogens from an H constraint or else from the default valence model.
  /// Throws MolError when no valid molecule results.
  MolGraph template_graph() const;

private:
  std::string name_;
  std::string text_;
  std::vector<AtomQuery> atoms_;
  std::vector<QueryBond> bonds_;
};

/// Embeddings of p in g: result[k][i] is the target atom for pattern atom i.
/// Embeddings covering the same target atom set are reported once.
std::vector<std::vector<int>> match(const Pattern &p, const MolGraph &g);

/// All embeddings without de-duplication (test oracle support).
std::vector<std::vector<int>> match_all(const Pattern &p, const MolGraph &g);

/// True when p has at least one embedding in g.
bool has_match(const Pattern &p, const MolGraph &g);

struct KeyEntry {
  int key_index;
  std::string name;
  Pattern pattern;
  std::string template_smiles;  // optional explicit fragment for attachment
};

/// Fragment attached when the key is added to a molecule: the explicit
/// template when the table gives one, otherwise pattern.template_graph().
MolGraph key_template(const KeyEntry &entry);

/// Ordered pattern table read from a text file of
/// `key_index<TAB>name<TAB>pattern` lines after a `#`-prefixed version
/// header. An optional fourth column gives a template SMILES. Key indices
/// must be dense from 0.
class KeyTable {
public:
  KeyTable() = default;
  KeyTable(std::string version, std::vector<KeyEntry> entries);

  static KeyTable load(const std::string &path);
  static KeyTable parse(std::string_view content, const std::string &source = "");

  const std::string &version() const { return version_; }
  int width() const { return static_cast<int>(entries_.size()); }
  const std::vector<KeyEntry> &entries() const { return entries_; }
  const KeyEntry &entry(int k) const { return entries_[k]; }

private:
  std::string version_;
  std::vector<KeyEntry> entries_;
};

struct KeyProfile {
  Fingerprint bits;
  std::vector<int> present;
  std::vector<int> absent;
};

/// Bit k set iff entry k of the table matches g, plus the present and
/// absent key lists.
KeyProfile maccs_profile(const MolGraph &g, const KeyTable &table);

Fingerprint maccs_keys(const MolGraph &g, const KeyTable &table);

/// Directory holding the shipped tables (MOLLM_DATA_DIR overrides the
/// compiled-in location).
std::string data_dir();

/// The shipped MACCS-style key table and 72-group functional-group table,
/// loaded once.
const KeyTable &default_key_table();
const KeyTable &default_group_table();

inline constexpr int kNumFunctionalGroups = 72;

/// Presence vector over the functional-group table.
std::vector<std::uint8_t> functional_groups(const MolGraph &g,
                                            const KeyTable &table);

std::vector<std::uint8_t> functional_groups(const MolGraph &g);

}  // namespace mollm

#endif  // MOLLM_SUBSTRUCT_H_
