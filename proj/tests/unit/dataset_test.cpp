//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "mollm/canonical.h"
#include "mollm/dataset.h"
#include "mollm/scaffold.h"
#include "mollm/selfies.h"
#include "mollm/smiles.h"

namespace {

using namespace mollm;

InstructionRecord rec(const std::string &task, const std::string &smiles, Split split) {
  InstructionRecord r;
  r.task_id = task;
  r.task_group = TaskGroup::kPropertyRegression;
  r.instruction = "predict";
  r.input_selfies = to_selfies(parse_smiles(smiles));
  r.target = "0.5";
  r.source = "unit";
  r.split = split;
  return r;
}

TEST(DedupTest, DropsTrainCopyOfTestMolecule) {
  const auto out = dedup({rec("a", "CCO", Split::kTrain), rec("a", "OCC", Split::kTest),
                          rec("a", "CCN", Split::kTrain)});
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].split, Split::kTest);
  EXPECT_EQ(*molecule_key(out[1]), canonical_smiles(parse_smiles("CCN")));
}

TEST(DedupTest, OtherTasksAreUntouched) {
  EXPECT_EQ(dedup({rec("a", "CCO", Split::kTrain), rec("b", "CCO", Split::kTest)}).size(), 2u);
}

TEST(DedupTest, DisjointUnchanged) {
  EXPECT_EQ(dedup({rec("a", "CCO", Split::kTrain), rec("a", "CCC", Split::kTest)}).size(), 2u);
}

TEST(ScaffoldSplitTest, SingleScaffoldWarns) {
  const SplitResult r = scaffold_split(
      {rec("a", "Cc1ccccc1", Split::kTrain), rec("a", "Oc1ccccc1", Split::kTrain)}, 0.2);
  EXPECT_EQ(r.train.size(), 2u);
  EXPECT_TRUE(r.test.empty());
  EXPECT_FALSE(r.warnings.empty());
}

TEST(ScaffoldSplitTest, TenEqualGroupsPutTwoInTest) {
  const char *rings[] = {"C1CC1", "C1CCC1", "C1CCCC1", "C1CCCCC1", "c1ccccc1",
                         "C1CCCCCC1", "c1ccncc1", "c1ccoc1", "c1ccsc1", "C1CCNCC1"};
  std::vector<InstructionRecord> records;
  for (const char *ring: rings) {
    records.push_back(rec("a", ring, Split::kTrain));
    records.push_back(rec("a", std::string("CC") + ring, Split::kTrain));
  }
  const SplitResult r = scaffold_split(records, 0.2);
  std::set<std::string> test_scaffolds, train_scaffolds;
  for (const auto &x: r.test) {
    test_scaffolds.insert(scaffold_key(parse_selfies(*x.input_selfies)));
    EXPECT_EQ(x.split, Split::kTest);
  }
  for (const auto &x: r.train) train_scaffolds.insert(scaffold_key(parse_selfies(*x.input_selfies)));
  EXPECT_EQ(test_scaffolds.size(), 2u);
  EXPECT_EQ(r.test.size(), 4u);
  for (const auto &s: test_scaffolds) EXPECT_FALSE(train_scaffolds.contains(s));
}

TEST(ScaffoldSplitTest, AcyclicMoleculesShareOneGroup) {
  const SplitResult r = scaffold_split({rec("a", "CCO", Split::kTrain),
                                        rec("a", "CCCN", Split::kTrain),
                                        rec("a", "c1ccccc1", Split::kTrain)},
                                       0.4);
  ASSERT_EQ(r.test.size(), 1u);
  EXPECT_EQ(*molecule_key(r.test[0]), canonical_smiles(parse_smiles("c1ccccc1")));
}

TEST(SolubilityTest, StdThreshold) {
  EXPECT_NEAR(sample_std({-3.10, -3.15}), 0.0354, 1e-4);
  EXPECT_NEAR(sample_std({-3.0, -3.5}), 0.354, 1e-3);
  const std::vector<LabeledSolubility> entries = {
      {canonical_smiles(parse_smiles("CCO")), {-3.1}},
      {canonical_smiles(parse_smiles("CCN")), {-3.10, -3.15}},
      {canonical_smiles(parse_smiles("CCC")), {-3.0, -3.5}},
      {canonical_smiles(parse_smiles("CCCl")), {-1.0}},
  };
  const auto kept =
      ood_solubility_filter(entries, {canonical_smiles(parse_smiles("CCCl"))}, 0.1);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(*molecule_key(kept[0]), canonical_smiles(parse_smiles("CCO")));
  EXPECT_EQ(*molecule_key(kept[1]), canonical_smiles(parse_smiles("CCN")));
  EXPECT_EQ(kept[1].split, Split::kOod);
  EXPECT_NEAR(std::stod(kept[1].target), -3.125, 1e-9);
}

TEST(ReactionFilterTest, SharedScaffoldRemoved) {
  const std::vector<InstructionRecord> train = {rec("rxn", "Cc1ccccc1", Split::kTrain)};
  const std::vector<InstructionRecord> candidates = {rec("rxn", "Oc1ccccc1", Split::kOod),
                                                     rec("rxn", "OC1CCCCC1", Split::kOod)};
  const SplitResult r = ood_reaction_filter(candidates, train, 0.0);
  ASSERT_EQ(r.train.size() + r.test.size(), 1u);
  EXPECT_EQ(*molecule_key(r.train[0]), canonical_smiles(parse_smiles("OC1CCCCC1")));
}

TEST(RecordTest, JsonRoundTripAndErrors) {
  const InstructionRecord r = rec("a", "CCO", Split::kTest);
  std::stringstream ss;
  write_records(ss, {r});
  const auto back = read_records(ss);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(record_to_json(back[0]), record_to_json(r));

  std::stringstream bad("{\"task_id\":\"a\"}\n");
  EXPECT_THROW(read_records(bad), DatasetError);
  std::stringstream broken("\n{\"task_id\":\n");
  try {
    read_json_lines(broken);
    FAIL() << "expected DatasetError";
  } catch (const DatasetError &e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(TemplateTest, Slots) {
  const InstructionRecord r = rec("a", "CCO", Split::kTrain);
  EXPECT_EQ(render_template("plain text", r), "plain text");
  EXPECT_EQ(render_template("mol {selfies}", r), "mol " + *r.input_selfies);
  EXPECT_EQ(render_template("{{x}}", r), "{x}");
  EXPECT_THROW(render_template("{nope}", r), DatasetError);
  TemplateSet set;
  set.add("t", "{task_id}:{target}");
  EXPECT_EQ(set.render("t", r), "a:0.5");
  EXPECT_THROW(set.render("missing", r), DatasetError);
}

}  // namespace
