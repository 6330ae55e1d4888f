//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <numeric>

#include "mollm/canonical.h"
#include "mollm/molgraph.h"
#include "mollm/random_mol.h"
#include "mollm/scaffold.h"
#include "mollm/selfies.h"
#include "mollm/smiles.h"
#include "oracles.h"

namespace {

using namespace mollm;

MolGraph hand_benzene() {
  MolGraph g;
  for (int i = 0; i < 6; ++i) g.add_atom({6, 0, 1, true});
  for (int i = 0; i < 6; ++i) g.add_bond(i, (i + 1) % 6, BondOrder::kAromatic);
  return g;
}

MolGraph hand_ethanol() {
  MolGraph g;
  g.add_atom({6, 0, 3, false});
  g.add_atom({6, 0, 2, false});
  g.add_atom({8, 0, 1, false});
  g.add_bond(0, 1, BondOrder::kSingle);
  g.add_bond(1, 2, BondOrder::kSingle);
  return g;
}

std::vector<int> random_permutation(int n, Rng &rng) {
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  rng.shuffle(perm);
  return perm;
}

TEST(SmilesTest, Methane) {
  const MolGraph g = parse_smiles("C");
  ASSERT_EQ(g.num_atoms(), 1);
  EXPECT_EQ(g.num_bonds(), 0);
  EXPECT_EQ(g.atom(0).explicit_h, 4);
}

TEST(SmilesTest, KekuleBenzeneIsAromatic) {
  const MolGraph g = parse_smiles("C1=CC=CC=C1");
  ASSERT_EQ(g.num_atoms(), 6);
  ASSERT_EQ(g.num_bonds(), 6);
  for (const Atom &a: g.atoms()) EXPECT_TRUE(a.aromatic);
  const std::vector<bool> ring = ring_bonds(g);
  for (int b = 0; b < 6; ++b) EXPECT_TRUE(ring[b]);
  EXPECT_TRUE(oracle::isomorphic(g, hand_benzene()));
  EXPECT_TRUE(oracle::isomorphic(parse_smiles("c1ccccc1"), hand_benzene()));
}

TEST(SmilesTest, UnclosedBranchReportsPosition) {
  try {
    parse_smiles("C(");
    FAIL() << "expected MolError";
  } catch (const MolError &e) {
    EXPECT_EQ(e.kind(), MolErrorKind::kSyntax);
    EXPECT_EQ(e.position(), 2);
  }
}

TEST(SmilesTest, RejectsOvervalentCarbon) {
  EXPECT_THROW(parse_smiles("C(C)(C)(C)(C)C"), MolError);
}

TEST(SmilesTest, WriteThenParseIsIsomorphic) {
  Rng rng(11);
  for (int i = 0; i < 200; ++i) {
    const MolGraph g = random_molecule(rng);
    const MolGraph back = parse_smiles(write_smiles(g));
    EXPECT_TRUE(oracle::isomorphic(g, back)) << write_smiles(g);
  }
}

TEST(SelfiesTest, SingleCarbonIsMethane) {
  const MolGraph g = parse_selfies("[C]");
  ASSERT_EQ(g.num_atoms(), 1);
  EXPECT_EQ(g.atom(0).explicit_h, 4);
  EXPECT_EQ(to_selfies(g), "[C]");
}

TEST(SelfiesTest, ChainMatchesSmiles) {
  EXPECT_TRUE(oracle::isomorphic(parse_selfies("[C][C][O]"), parse_smiles("CCO")));
  EXPECT_TRUE(oracle::isomorphic(parse_selfies("[C][C][O]"), hand_ethanol()));
}

TEST(SelfiesTest, BranchOfOneSymbol) {
  MolGraph expected;
  expected.add_atom({6, 0, 3, false});
  expected.add_atom({9, 0, 0, false});
  expected.add_bond(0, 1, BondOrder::kSingle);
  EXPECT_TRUE(oracle::isomorphic(parse_selfies("[C][Branch1][C][F]"), expected));
}

TEST(SelfiesTest, EthanolRoundTrip) {
  const MolGraph g = hand_ethanol();
  EXPECT_TRUE(oracle::isomorphic(parse_selfies(to_selfies(g)), g));
}

TEST(SelfiesTest, UnsupportedElementIsVocabularyError) {
  MolGraph g;
  g.add_atom({119, 0, 0, false});
  try {
    to_selfies(g);
    FAIL() << "expected MolError";
  } catch (const MolError &e) {
    EXPECT_EQ(e.kind(), MolErrorKind::kVocabulary);
  }
}

TEST(SelfiesTest, UnknownSymbolReportsIndex) {
  try {
    parse_selfies("[C][Xx][C]");
    FAIL() << "expected MolError";
  } catch (const MolError &e) {
    EXPECT_EQ(e.kind(), MolErrorKind::kUnknownToken);
    EXPECT_EQ(e.position(), 1);
  }
}

TEST(SelfiesTest, AnySymbolSequenceDecodesToValidGraph) {
  const std::vector<std::string> alphabet = {"[C]", "[=C]", "[#C]", "[O]", "[=O]", "[N]",
                                             "[#N]", "[F]", "[Branch1]", "[Ring1]",
                                             "[=Branch1]", "[Ring2]", "[S]", "[=N]"};
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    std::string text;
    const int len = rng.uniform_int(1, 12);
    for (int k = 0; k < len; ++k) text += alphabet[rng.uniform_index(alphabet.size())];
    const MolGraph g = parse_selfies(text);
    EXPECT_TRUE(valence_ok(g)) << text;
  }
}

TEST(SelfiesTest, RandomRoundTrip) {
  Rng rng(21);
  for (int i = 0; i < 200; ++i) {
    const MolGraph g = random_molecule(rng);
    EXPECT_TRUE(oracle::isomorphic(parse_selfies(to_selfies(g)), g)) << write_smiles(g);
  }
}

TEST(CanonicalTest, IsomersAgree) {
  EXPECT_TRUE(oracle::isomorphic(parse_smiles("OCC"), parse_smiles("CCO")));
  EXPECT_EQ(canonical_smiles(parse_smiles("OCC")), canonical_smiles(parse_smiles("CCO")));
}

TEST(CanonicalTest, Idempotent) {
  const std::string once = canonical_smiles(parse_smiles("c1ccccc1CC(=O)O"));
  EXPECT_EQ(canonical_smiles(parse_smiles(once)), once);
}

TEST(CanonicalTest, PermutationInvariance) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const MolGraph g = random_molecule(rng);
    const std::vector<int> perm = random_permutation(g.num_atoms(), rng);
    EXPECT_EQ(canonical_smiles(g), canonical_smiles(g.permuted(perm)));
  }
}

TEST(CanonicalTest, AgreesWithIsomorphismOracle) {
  Rng rng(8);
  RandomMolOptions small;
  small.max_steps = 2;
  for (int i = 0; i < 200; ++i) {
    const MolGraph a = random_molecule(rng, small);
    const MolGraph b = random_molecule(rng, small);
    EXPECT_EQ(canonical_smiles(a) == canonical_smiles(b), oracle::isomorphic(a, b));
  }
}

TEST(CanonicalTest, AutomorphismsOfBenzene) {
  EXPECT_EQ(oracle::count_automorphisms(hand_benzene()), 12);
}

TEST(ScaffoldTest, EthylbenzeneToBenzene) {
  const MolGraph g = parse_smiles("CCc1ccccc1");
  const MolGraph s = murcko_scaffold(g);
  EXPECT_TRUE(oracle::isomorphic(s, oracle::pruned_scaffold(g)));
  EXPECT_TRUE(oracle::isomorphic(s, hand_benzene()));
}

TEST(ScaffoldTest, AcyclicIsEmpty) {
  const MolGraph g = parse_smiles("CCCCCC");
  EXPECT_TRUE(murcko_scaffold(g).empty());
  EXPECT_EQ(scaffold_key(g), "");
}

TEST(ScaffoldTest, BenzeneIsFixedPoint) {
  const MolGraph g = hand_benzene();
  EXPECT_TRUE(oracle::isomorphic(murcko_scaffold(g), g));
}

TEST(ScaffoldTest, KeepsExocyclicCarbonyl) {
  const MolGraph g = parse_smiles("CCC1CCC(=O)CC1");
  EXPECT_TRUE(oracle::isomorphic(murcko_scaffold(g), parse_smiles("O=C1CCCCC1")));
}

TEST(ScaffoldTest, AgreesWithPruningOracle) {
  Rng rng(17);
  for (int i = 0; i < 300; ++i) {
    const MolGraph g = random_molecule(rng);
    EXPECT_TRUE(oracle::isomorphic(murcko_scaffold(g), oracle::pruned_scaffold(g)))
        << write_smiles(g);
  }
}

}  // namespace
