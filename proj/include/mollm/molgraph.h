//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_MOLGRAPH_H_
#define MOLLM_MOLGRAPH_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mollm {

enum class BondOrder : std::uint8_t {
  kSingle = 1,
  kDouble = 2,
  kTriple = 3,
  kAromatic = 4,
};

/// Integer bond order used for valence bookkeeping. Aromatic bonds count 1;
/// the delocalized extra bond is accounted for by kekulization.
inline int bond_valence(BondOrder order) {
  return order == BondOrder::kAromatic ? 1 : static_cast<int>(order);
}

struct Atom {
  int element = 6;  // atomic number
  int formal_charge = 0;
  int explicit_h = 0;  // hydrogen count after resolution
  bool aromatic = false;
  int index = 0;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::kSingle;

  int other(int atom) const { return atom == a ? b : a; }
};

struct Neighbor {
  int atom;
  int bond;
};

enum class MolErrorKind {
  kSyntax,
  kValence,
  kRingClosure,
  kKekulize,
  kUnknownToken,
  kVocabulary,
  kInvalidGraph,
};

class MolError: public std::runtime_error {
public:
  MolError(MolErrorKind kind, const std::string &what,
           std::ptrdiff_t position = -1)
      : std::runtime_error(what), kind_(kind), position_(position) { }

  MolErrorKind kind() const { return kind_; }

  // Character (SMILES) or token (SELFIES) offset; -1 when not applicable.
  std::ptrdiff_t position() const { return position_; }

private:
  MolErrorKind kind_;
  std::ptrdiff_t position_;
};

/// Molecular graph G = (V, E) with hydrogens stored as per-atom counts.
///
/// Bond endpoints are always in range and no atom pair is bonded twice;
/// add_bond() enforces both. Multiple connected components are allowed.
class MolGraph {
public:
  int add_atom(Atom atom);
  int add_bond(int a, int b, BondOrder order);

  int num_atoms() const { return static_cast<int>(atoms_.size()); }
  int num_bonds() const { return static_cast<int>(bonds_.size()); }
  bool empty() const { return atoms_.empty(); }

  const std::vector<Atom> &atoms() const { return atoms_; }
  const std::vector<Bond> &bonds() const { return bonds_; }
  const Atom &atom(int i) const { return atoms_[i]; }
  Atom &atom(int i) { return atoms_[i]; }
  const Bond &bond(int i) const { return bonds_[i]; }
  void set_bond_order(int bond, BondOrder order) { bonds_[bond].order = order; }

  std::span<const Neighbor> neighbors(int atom) const { return adj_[atom]; }
  int degree(int atom) const { return static_cast<int>(adj_[atom].size()); }
  int heavy_degree(int atom) const;

  /// Bond index joining a and b, or -1.
  int find_bond(int a, int b) const;

  /// Sum of bond_valence() over the atom's bonds.
  int bond_order_sum(int atom) const;

  /// Graph with atom i moved to position perm[i].
  MolGraph permuted(std::span<const int> perm) const;

private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<Neighbor>> adj_;
};

// Graph algorithms --------------------------------------------------------

/// Component label per atom; labels are dense and ordered by lowest atom.
std::vector<int> connected_components(const MolGraph &g, int *count = nullptr);

/// Bonds that lie on at least one cycle (i.e. are not bridges).
std::vector<bool> ring_bonds(const MolGraph &g);

/// Atoms incident to at least one ring bond.
std::vector<bool> ring_atoms(const MolGraph &g);

/// Sub-graph on the atoms with keep[i] set; atom order is preserved.
/// Hydrogen counts are copied verbatim; callers repair valence.
MolGraph induced_subgraph(const MolGraph &g, const std::vector<bool> &keep,
                          std::vector<int> *old_to_new = nullptr);

// Valence, kekulization and aromaticity -----------------------------------

/// True when every atom satisfies hydrogens + Kekulé bond orders <= its
/// maximum allowed valence (atoms without a valence rule always pass).
bool valence_ok(const MolGraph &g);

/// Throws MolError(kValence) naming the first offending atom.
void check_valence(const MolGraph &g);

/// Copy of g with every aromatic bond replaced by single or double bonds.
/// Aromatic atom flags are cleared. Throws MolError(kKekulize) when no
/// assignment satisfies the hydrogen counts.
MolGraph kekulize(const MolGraph &g);

/// Replaces aromatic flags and bond orders on a Kekulé graph with the
/// perceived aromatic rings. The result does not depend on which Kekulé
/// structure was supplied.
void perceive_aromaticity(MolGraph &g);

/// Final step shared by every reader: turns a raw graph (possibly holding
/// aromatic lowercase atoms and bonds) into a resolved MolGraph.
///
/// Atoms flagged in implicit_h get their hydrogen count from the default
/// valence model; the rest keep the count they carry. Throws kKekulize or
/// kValence on failure.
MolGraph resolve_molecule(MolGraph raw, const std::vector<bool> &implicit_h);

/// Deletes the flagged atoms, converts each removed bond into hydrogens on
/// the surviving neighbour, and re-perceives aromaticity.
MolGraph remove_atoms(const MolGraph &g, const std::vector<bool> &remove);

}  // namespace mollm

#endif  // MOLLM_MOLGRAPH_H_
