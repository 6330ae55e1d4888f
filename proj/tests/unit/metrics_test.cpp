//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>

#include "mollm/fingerprint.h"
#include "mollm/metrics.h"
#include "mollm/smiles.h"

namespace {

using namespace mollm;

std::vector<std::string> toks(std::string_view text) { return tokenize_text(text); }

TEST(ExactTest, Examples) {
  EXPECT_EQ(exact("OCC", "CCO"), 1);
  EXPECT_EQ(exact("CCO", "CCN"), 0);
  EXPECT_EQ(exact("C1CC", "CCO"), 0);
  EXPECT_EQ(exact("[C][C][O]", "CCO"), 1);
  EXPECT_THROW(exact("CCO", "C1CC"), MolError);
}

TEST(ValidityTest, Fractions) {
  const std::vector<std::string> good = {"CCO", "c1ccccc1"};
  const std::vector<std::string> bad = {"C1CC", "xyz"};
  const std::vector<std::string> mixed = {"CCO", "C(C"};
  EXPECT_EQ(validity(good), 1.0);
  EXPECT_EQ(validity(bad), 0.0);
  EXPECT_EQ(validity(mixed), 0.5);
  EXPECT_EQ(validity(std::vector<std::string> {}), 0.0);
}

TEST(FtsTest, Examples) {
  EXPECT_EQ(fts("CCO", "OCC", FtsKind::kMorgan), 1.0);
  EXPECT_EQ(fts("CCO", "OCC", FtsKind::kMaccs), 1.0);
  EXPECT_EQ(fts("garbage(", "CCO", FtsKind::kPath), 0.0);
  EXPECT_DOUBLE_EQ(fts("C", "c1ccccc1", FtsKind::kMorgan),
                   tanimoto(morgan(parse_smiles("C")), morgan(parse_smiles("c1ccccc1"))));
}

TEST(TokenizeTest, LowercaseAndPunctuation) {
  EXPECT_EQ(toks("The Molecule, is  an ACID."),
            std::vector<std::string>({"the", "molecule", "is", "an", "acid"}));
}

TEST(BleuTest, HandCounts) {
  const auto ref = toks("a b d");
  EXPECT_NEAR(bleu(toks("a b c"), ref, 1), 2.0 / 3.0, 1e-9);
  EXPECT_NEAR(bleu(ref, ref, 4), 0.0, 1e-9);
  const auto long_ref = toks("the cat sat on the mat");
  EXPECT_NEAR(bleu(long_ref, long_ref, 4), 1.0, 1e-9);
  EXPECT_EQ(bleu({}, long_ref, 2), 0.0);
  EXPECT_NEAR(bleu(toks("the cat"), long_ref, 1), std::exp(1.0 - 6.0 / 2.0), 1e-9);
  EXPECT_NEAR(bleu(toks("the the the"), toks("the cat"), 1), 1.0 / 3.0, 1e-9);
}

TEST(BleuTest, CorpusPoolsCounts) {
  const std::vector<std::vector<std::string>> preds = {toks("a b c"), toks("x y")};
  const std::vector<std::vector<std::string>> refs = {toks("a b d"), toks("x y")};
  EXPECT_NEAR(corpus_bleu(preds, refs, 1), 4.0 / 5.0, 1e-9);
  EXPECT_NEAR(corpus_bleu(preds, refs, 2), std::sqrt(4.0 / 5.0 * 2.0 / 3.0), 1e-9);
}

TEST(RougeTest, HandCounts) {
  EXPECT_NEAR(rouge("a b", "a c", RougeVariant::kR1), 0.5, 1e-9);
  EXPECT_EQ(rouge("a b c", "a b c", RougeVariant::kR2), 1.0);
  EXPECT_EQ(rouge("a b", "c d", RougeVariant::kRL), 0.0);
  EXPECT_NEAR(rouge("a b c d", "a c d", RougeVariant::kRL), 2.0 * (3.0 / 4.0) / (3.0 / 4.0 + 1.0),
              1e-9);
  EXPECT_NEAR(rouge("a b c", "a b d", RougeVariant::kR2), 0.5, 1e-9);
}

TEST(MeteorTest, StemsAndBoundaries) {
  EXPECT_EQ(stem("running"), "run");
  EXPECT_EQ(meteor_lite("the acid is stable", "the acid is stable"), 1.0);
  EXPECT_EQ(meteor_lite("a b", "c d"), 0.0);
  EXPECT_NEAR(meteor_lite("running", "run"), 1.0, 1e-9);
  EXPECT_GT(meteor_lite("a b c d", "a b c d"), meteor_lite("a c b d", "a b c d"));
}

TEST(RegressionTest, HandValues) {
  const std::vector<double> preds = {1.0, 3.0};
  const std::vector<double> refs = {0.0, 0.0};
  const RegressionMetrics m = regression_metrics(preds, refs);
  EXPECT_NEAR(m.rmse, std::sqrt(5.0), 1e-9);
  EXPECT_NEAR(m.mae, 2.0, 1e-9);
  const RegressionMetrics same = regression_metrics(refs, refs);
  EXPECT_EQ(same.rmse, 0.0);
  EXPECT_EQ(same.mae, 0.0);
}

TEST(RegressionTest, ImputesInvalidText) {
  const std::vector<std::string> preds = {"1.0", "not a number"};
  const std::vector<double> refs = {0.0, 0.0};
  const RegressionMetrics m = regression_metrics(preds, refs, 3.0);
  EXPECT_NEAR(m.rmse, std::sqrt(5.0), 1e-9);
  EXPECT_EQ(m.invalid_rate, 0.5);
  EXPECT_THROW(regression_metrics(preds, refs), std::invalid_argument);
  EXPECT_FALSE(parse_number("1.5x").has_value());
  EXPECT_EQ(*parse_number(" -2.5 "), -2.5);
}

TEST(RocAucTest, Conventions) {
  const std::vector<int> labels = {0, 0, 1, 1};
  const std::vector<double> ranked = {0.1, 0.2, 0.8, 0.9};
  const std::vector<double> reversed = {0.9, 0.8, 0.2, 0.1};
  const std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
  EXPECT_EQ(roc_auc(ranked, labels), 1.0);
  EXPECT_EQ(roc_auc(reversed, labels), 0.0);
  EXPECT_EQ(roc_auc(flat, labels), 0.5);
  const std::vector<double> mixed = {0.1, 0.6, 0.4, 0.9};
  EXPECT_NEAR(roc_auc(mixed, labels), 0.75, 1e-12);
  const std::vector<int> one_class = {1, 1, 1, 1};
  EXPECT_THROW(roc_auc(ranked, one_class), std::invalid_argument);
}

}  // namespace
