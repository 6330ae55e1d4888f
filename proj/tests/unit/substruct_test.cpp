//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "mollm/random_mol.h"
#include "mollm/smiles.h"
#include "mollm/substruct.h"
#include "oracles.h"

namespace {

using namespace mollm;

const KeyTable &two_key_table() {
  static const KeyTable table =
      KeyTable::parse("# test v1\n0\thydroxyl\t[O;X2;H1]\n1\tcarbonyl\t[C;X3]=[O;X1]\n");
  return table;
}

TEST(MatchTest, HydroxylOnEthanol) {
  const Pattern p = Pattern::parse("[O;X2;H1]");
  const MolGraph g = parse_smiles("CCO");
  EXPECT_EQ(match(p, g).size(), 1u);
  EXPECT_EQ(oracle::brute_force_embeddings(p, g).size(), 1u);
}

TEST(MatchTest, CarbonylOnHexane) {
  EXPECT_TRUE(match(Pattern::parse("[C;X3]=[O;X1]"), parse_smiles("CCCCCC")).empty());
}

TEST(MatchTest, BenzeneEmbeddingsCollapse) {
  const Pattern p = Pattern::parse("c1ccccc1");
  const MolGraph g = parse_smiles("c1ccccc1");
  const auto raw = oracle::brute_force_embeddings(p, g);
  EXPECT_EQ(raw.size(), 12u);
  EXPECT_EQ(static_cast<int>(raw.size()), oracle::count_automorphisms(g));
  EXPECT_EQ(match_all(p, g).size(), 12u);
  EXPECT_EQ(match(p, g).size(), 1u);
}

TEST(MatchTest, QueryPrimitives) {
  const MolGraph g = parse_smiles("OC(=O)c1ccc(N)cc1[N+](C)(C)C");
  for (const char *text: {"[#7;+1]", "[N;H2]", "[c;R]", "[C;!R]", "[O;D1]", "[N;X4]", "a-N",
                          "c:c", "C~O", "[C,N;!H0]", "*=*", "[N,O;!R]"}) {
    const Pattern p = Pattern::parse(text);
    EXPECT_EQ(match(p, g).size(),
              oracle::embedding_atom_sets(oracle::brute_force_embeddings(p, g)).size())
        << text;
  }
}

TEST(MatchTest, AgreesWithBruteForceOnSmallGraphs) {
  const KeyTable &table = default_key_table();
  Rng rng(4);
  RandomMolOptions small;
  small.max_steps = 2;
  small.max_heavy_atoms = 8;
  int graphs = 0;
  while (graphs < 40) {
    const MolGraph g = random_molecule(rng, small);
    if (g.num_atoms() > 8) continue;
    ++graphs;
    for (const KeyEntry &e: table.entries()) {
      const auto oracle_all = oracle::brute_force_embeddings(e.pattern, g);
      std::vector<std::vector<int>> ours = match_all(e.pattern, g);
      std::vector<std::vector<int>> theirs = oracle_all;
      std::sort(ours.begin(), ours.end());
      std::sort(theirs.begin(), theirs.end());
      EXPECT_EQ(ours, theirs) << e.name << " on " << write_smiles(g);
      EXPECT_EQ(match(e.pattern, g).size(), oracle::embedding_atom_sets(oracle_all).size())
          << e.name << " on " << write_smiles(g);
    }
  }
}

TEST(PatternTest, RejectsMalformedText) {
  EXPECT_THROW(Pattern::parse("C("), MolError);
  EXPECT_THROW(Pattern::parse("[C"), MolError);
  EXPECT_THROW(Pattern::parse("C1CC"), MolError);
}

TEST(MaccsTest, EmptyTableGivesEmptyFingerprint) {
  const KeyTable empty = KeyTable::parse("# empty v1\n");
  const Fingerprint fp = maccs_keys(parse_smiles("CCO"), empty);
  EXPECT_EQ(fp.count(), 0);
}

TEST(MaccsTest, HydroxylAndCarbonyl) {
  const KeyProfile prof = maccs_profile(parse_smiles("CCO"), two_key_table());
  EXPECT_EQ(prof.bits.on_bits(), std::vector<int>({0}));
  EXPECT_EQ(prof.present, std::vector<int>({0}));
  EXPECT_EQ(prof.absent, std::vector<int>({1}));
}

TEST(MaccsTest, PresentAndAbsentPartitionTheTable) {
  Rng rng(9);
  const KeyTable &table = default_key_table();
  for (int i = 0; i < 50; ++i) {
    const KeyProfile prof = maccs_profile(random_molecule(rng), table);
    std::vector<int> all = prof.present;
    all.insert(all.end(), prof.absent.begin(), prof.absent.end());
    std::sort(all.begin(), all.end());
    std::vector<int> expected(table.width());
    std::iota(expected.begin(), expected.end(), 0);
    EXPECT_EQ(all, expected);
    EXPECT_EQ(prof.bits.count(), static_cast<int>(prof.present.size()));
  }
}

TEST(MaccsTest, PermutationInvariance) {
  Rng rng(10);
  for (int i = 0; i < 50; ++i) {
    const MolGraph g = random_molecule(rng);
    std::vector<int> perm(g.num_atoms());
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm);
    EXPECT_EQ(maccs_keys(g, default_key_table()), maccs_keys(g.permuted(perm), default_key_table()));
  }
}

TEST(KeyTableTest, RejectsGapsInIndices) {
  EXPECT_THROW(KeyTable::parse("# v\n0\ta\tC\n2\tb\tN\n"), std::exception);
}

TEST(KeyTableTest, ShippedTablesLoad) {
  EXPECT_EQ(default_key_table().version(), "mollm-keys v1");
  EXPECT_EQ(default_group_table().width(), kNumFunctionalGroups);
}

TEST(FunctionalGroupTest, MethaneHasNone) {
  const auto groups = functional_groups(parse_smiles("C"));
  ASSERT_EQ(groups.size(), static_cast<std::size_t>(kNumFunctionalGroups));
  EXPECT_EQ(std::count(groups.begin(), groups.end(), 1), 0);
}

TEST(FunctionalGroupTest, AnilineHasPrimaryAromaticAmine) {
  const KeyTable &table = default_group_table();
  const auto groups = functional_groups(parse_smiles("Nc1ccccc1"));
  bool found = false;
  for (const KeyEntry &e: table.entries()) {
    if (e.name == "fr_aniline") {
      found = true;
      EXPECT_EQ(groups[e.key_index], 1);
    }
  }
  EXPECT_TRUE(found);
}

TEST(FunctionalGroupTest, PrevalentGroupsAreNotLabels) {
  for (const KeyEntry &e: default_group_table().entries()) {
    EXPECT_NE(e.name, "fr_NH0");
    EXPECT_NE(e.name, "fr_benzene");
  }
}

TEST(TemplateTest, EveryKeyTemplateIsValid) {
  for (const KeyTable *table: {&default_key_table(), &default_group_table()}) {
    for (const KeyEntry &e: table->entries()) {
      const MolGraph t = key_template(e);
      EXPECT_FALSE(t.empty()) << e.name;
      EXPECT_TRUE(valence_ok(t)) << e.name;
    }
  }
}

}  // namespace
