//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mollm/canonical.h"
#include "mollm/perturb.h"
#include "mollm/random_mol.h"
#include "mollm/sampling.h"
#include "mollm/selfies.h"
#include "mollm/smiles.h"

namespace {

using namespace mollm;

InstructionRecord record_for(const std::string &selfies) {
  InstructionRecord r;
  r.task_id = "t";
  r.task_group = TaskGroup::kPropertyRegression;
  r.instruction = "predict";
  r.input_selfies = selfies;
  r.target = "1.0";
  r.source = "test";
  return r;
}

TEST(PerturbTest, ZeroRatioIsIdentity) {
  Rng rng(1);
  for (int i = 0; i < 20; ++i) {
    const MolGraph g = random_molecule(rng);
    EXPECT_EQ(canonical_smiles(perturb_graph(g, default_key_table(), 0.0, i)),
              canonical_smiles(g));
  }
}

TEST(PerturbTest, TenPresentKeysSelectThree) {
  std::string text = "# ten v1\n";
  const char *patterns[] = {"C", "O", "N", "C-C", "C-O", "C-N", "[O;H1]", "[N;H2]", "CC(C)C",
                            "S", "F", "Cl"};
  for (int k = 0; k < 12; ++k) {
    text += std::to_string(k) + "\tk" + std::to_string(k) + "\t" + patterns[k] + "\n";
  }
  const KeyTable table = KeyTable::parse(text);
  const MolGraph g = parse_smiles("NCC(C)(CO)CCS");
  PerturbLog log;
  perturb_graph(g, table, 0.3, 42, &log);
  EXPECT_EQ(log.num_present, 10);
  EXPECT_EQ(log.num_selected, 3);
  EXPECT_EQ(log.selected_removals.size(), 3u);
  EXPECT_EQ(log.selected_additions.size(), 2u);
}

TEST(PerturbTest, SelectionCountIsCeilOfRatio) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const MolGraph g = random_molecule(rng);
    PerturbLog log;
    const MolGraph out = perturb_graph(g, default_key_table(), 0.3, i, &log);
    const int expected = static_cast<int>(std::ceil(0.3 * log.num_present - 1e-9));
    EXPECT_EQ(static_cast<int>(log.selected_removals.size()), expected);
    EXPECT_EQ(static_cast<int>(log.selected_additions.size()),
              std::min(expected, default_key_table().width() - log.num_present));
    EXPECT_TRUE(valence_ok(out));
  }
}

TEST(PerturbTest, Deterministic) {
  const MolGraph g = parse_smiles("CC(=O)Nc1ccc(O)cc1");
  const std::string a = canonical_smiles(perturb_graph(g, default_key_table(), 0.3, 99));
  const std::string b = canonical_smiles(perturb_graph(g, default_key_table(), 0.3, 99));
  EXPECT_EQ(a, b);
}

TEST(PerturbTest, PairsDifferFromChosen) {
  Rng rng(3);
  int differ = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    const PreferencePair pair =
        make_pair(record_for(to_selfies(random_molecule(rng))), default_key_table(), 0.3, i);
    differ += canonical_smiles(pair.chosen) != canonical_smiles(pair.rejected);
  }
  EXPECT_GE(differ, n * 99 / 100);
}

TEST(PerturbTest, SingleAtomOnlyGainsAtoms) {
  PerturbLog log;
  const MolGraph out = perturb_graph(parse_smiles("C"), default_key_table(), 0.3, 5, &log);
  EXPECT_TRUE(log.removed.empty());
  EXPECT_TRUE(valence_ok(out));
  EXPECT_GE(out.num_atoms(), 1);
}

TEST(PerturbTest, MalformedRecordIsError) {
  EXPECT_THROW(make_pair(record_for("[C][Xx]"), default_key_table(), 0.3, 1), MolError);
}

TEST(SamplingTest, CountsByColumn) {
  EXPECT_EQ(count_groups({}, 3).counts, std::vector<double>({0, 0, 0}));
  EXPECT_EQ(count_groups({{1, 0, 1}, {1, 0, 0}}).counts, std::vector<double>({2, 0, 1}));
  EXPECT_EQ(count_groups({{1, 1, 1, 1}}).counts, std::vector<double>({1, 1, 1, 1}));
}

TEST(SamplingTest, TwoMoleculeWeights) {
  const std::vector<GroupLabel> labels = {{1, 1}, {1, 0}};
  const SamplingWeights w = weights(labels, count_groups(labels));
  EXPECT_NEAR(w.sigma[0], 2.25, 1e-5);
  EXPECT_NEAR(w.sigma[1], 0.25, 1e-5);
  EXPECT_NEAR(w.p[0], 0.9, 1e-5);
  EXPECT_NEAR(w.p[1], 0.1, 1e-5);
}

TEST(SamplingTest, SingleMoleculeAndEmptyRows) {
  const std::vector<GroupLabel> one = {{1, 0, 1}};
  EXPECT_DOUBLE_EQ(weights(one, count_groups(one)).p[0], 1.0);
  const std::vector<GroupLabel> labels = {{1, 0}, {0, 0}, {1, 1}};
  EXPECT_EQ(weights(labels, count_groups(labels)).p[1], 0.0);
}

TEST(SamplingTest, DrawsFollowWeights) {
  SamplingWeights w;
  w.p = {1.0, 0.0};
  for (std::size_t i: sample(w, 5, 7)) EXPECT_EQ(i, 0u);
  EXPECT_TRUE(sample(w, 0, 7).empty());
  w.p = {0.9, 0.1};
  const auto draws = sample(w, 100000, 11);
  const double zeros = static_cast<double>(std::count(draws.begin(), draws.end(), 0u));
  EXPECT_NEAR(zeros / 1e5, 0.9, 0.01);
  EXPECT_EQ(sample(w, 1000, 3), sample(w, 1000, 3));
}

TEST(SamplingTest, FilterAscendingCounts) {
  std::vector<double> counts(87);
  std::iota(counts.begin(), counts.end(), 0.0);
  const GroupFilter f = filter_groups(counts);
  std::vector<int> expected(75);
  std::iota(expected.begin(), expected.end(), 1);
  EXPECT_EQ(f.retained, expected);
  EXPECT_EQ(f.dropped_common.front(), 86);
  EXPECT_EQ(f.dropped_rare, std::vector<int>({0}));
}

TEST(SamplingTest, FilterEqualCountsUsesIndexTieRule) {
  const std::vector<double> counts(87, 5.0);
  const GroupFilter f = filter_groups(counts);
  EXPECT_EQ(f.retained.size(), 75u);
  EXPECT_EQ(f.retained.front(), 12);
  std::vector<int> common(11);
  std::iota(common.begin(), common.end(), 0);
  EXPECT_EQ(f.dropped_common, common);
  EXPECT_EQ(f.dropped_rare, std::vector<int>({11}));
}

TEST(SamplingTest, EntropyOfUniformCounts) {
  const std::vector<double> counts = {3, 3, 3, 3};
  EXPECT_NEAR(count_entropy(counts), std::log(4.0), 1e-12);
}

}  // namespace
