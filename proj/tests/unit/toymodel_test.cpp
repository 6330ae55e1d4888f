//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <sstream>

#include "grad_check.h"
#include "mollm/random.h"
#include "mollm/smiles.h"
#include "mollm/toymodel.h"

namespace {

using namespace mollm;
using namespace mollm::toy;

ToyParams random_params(int vocab, std::uint64_t seed) {
  ModelDims dims;
  dims.vocab = vocab;
  ToyParams p(dims);
  p.init(seed, false);
  return p;
}

const SyntheticTask &small_task() {
  static const SyntheticTask task = make_synthetic_task(12, 5, default_key_table());
  return task;
}

TEST(ToyModelTest, EmbeddingRows) {
  const ToyParams p = random_params(8, 1);
  EXPECT_EQ(encode(parse_smiles("CCO"), p).h().rows(), 10);
  EXPECT_EQ(encode(parse_smiles("CCO"), p).h().cols(), kEmbedDim);
  EXPECT_EQ(encode(parse_smiles("C"), p).h().rows(), 4);
}

TEST(ToyModelTest, ZeroOutputInitIsUniform) {
  ModelDims dims;
  dims.vocab = 20;
  ToyParams p(dims);
  p.init(3, true);
  const GraphEncoding enc = encode(parse_smiles("CCO"), p);
  const SequenceScore s = score_pooled(enc.pooled(), {1, 2}, {3, 4, 5}, p);
  for (double lp: s.log_probs) EXPECT_NEAR(lp, -std::log(20.0), 1e-12);
}

TEST(ToyModelTest, ProbabilitiesSumToOne) {
  const ToyParams p = random_params(16, 2);
  const GraphEncoding enc = encode(parse_smiles("c1ccccc1O"), p);
  const SequenceScore s = score_pooled(enc.pooled(), {1}, {2, 3, 4, 5}, p);
  for (int t = 0; t < s.probs.cols(); ++t) EXPECT_NEAR(s.probs.col(t).sum(), 1.0, 1e-12);
  for (double lp: s.log_probs) EXPECT_LE(lp, 0.0);
}

TEST(ToyModelTest, ScoreSequenceMatchesPooledScore) {
  const ToyParams p = random_params(16, 4);
  const GraphEncoding enc = encode(parse_smiles("CC(=O)N"), p);
  const auto direct = score_sequence(enc.h(), {1, 2}, {3}, {4, 5}, p);
  const auto pooled = score_pooled(enc.pooled(), {1, 2, 3}, {4, 5}, p).log_probs;
  ASSERT_EQ(direct.size(), pooled.size());
  for (std::size_t i = 0; i < direct.size(); ++i) EXPECT_NEAR(direct[i], pooled[i], 1e-12);
}

TEST(ToyModelTest, PermutedGraphScoresTheSame) {
  const ToyParams p = random_params(16, 6);
  const MolGraph g = parse_smiles("CC(=O)Nc1ccccc1");
  std::vector<int> perm(g.num_atoms());
  for (int i = 0; i < g.num_atoms(); ++i) perm[i] = (i + 3) % g.num_atoms();
  const Eigen::VectorXd a = encode(g, p).pooled();
  const Eigen::VectorXd b = encode(g.permuted(perm), p).pooled();
  EXPECT_LT((a - b).norm(), 1e-10);
}

class ObjectiveGradientTest: public ::testing::TestWithParam<int> { };

TEST_P(ObjectiveGradientTest, MatchesCentralDifferences) {
  const SyntheticTask &task = small_task();
  const ToyExample &ex = task.examples[GetParam() % task.examples.size()];
  ToyParams p = random_params(task.vocab.size(), 100 + GetParam());
  MolpoConfig cfg;
  const double gamma = 0.1;

  using Fn = std::function<double(const ToyParams &, Eigen::VectorXd *)>;
  const std::vector<std::pair<const char *, Fn>> objectives = {
      {"sft", [&](const ToyParams &q, Eigen::VectorXd *g) { return sft_objective(ex, q, g); }},
      {"molpo",
       [&](const ToyParams &q, Eigen::VectorXd *g) {
         return molpo_objective(ex, q, gamma, cfg, g);
       }},
      {"func",
       [&](const ToyParams &q, Eigen::VectorXd *g) { return funcgroup_objective(ex, q, g); }},
  };
  Rng rng(GetParam());
  for (const auto &[name, fn]: objectives) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(p.size());
    fn(p, &grad);
    auto value = [&](const Eigen::VectorXd &theta) {
      ToyParams q = p;
      q.theta = theta;
      return fn(q, nullptr);
    };
    for (const ParamGroup &group: p.groups()) {
      const Eigen::VectorXd dir = oracle::random_direction(p.size(), group.offset, group.size(),
                                                           [&] { return rng.normal(); });
      const double err = oracle::fd_directional_error(value, p.theta, dir, grad.dot(dir));
      EXPECT_LT(err, 1e-4) << name << " " << group.name;
    }
    const Eigen::VectorXd dir =
        oracle::random_direction(p.size(), 0, p.size(), [&] { return rng.normal(); });
    EXPECT_LT(oracle::fd_directional_error(value, p.theta, dir, grad.dot(dir)), 1e-4) << name;
  }
}

INSTANTIATE_TEST_SUITE_P(Examples, ObjectiveGradientTest, ::testing::Values(0, 1, 2));

TEST(TrainTest, ZeroWeightMolpoMatchesSftOnly) {
  const SyntheticTask &task = small_task();
  ModelDims dims;
  dims.vocab = task.vocab.size();
  TrainConfig cfg;
  cfg.steps = 20;
  cfg.batch_size = 4;
  cfg.seed = 9;
  cfg.molpo.c = 0.0;
  cfg.mode = TrainMode::kSftOnly;
  const TrainResult a = train(task.examples, dims, cfg);
  cfg.mode = TrainMode::kSftPlusMolpo;
  const TrainResult b = train(task.examples, dims, cfg);
  ASSERT_EQ(a.params.size(), b.params.size());
  EXPECT_TRUE(a.params.theta == b.params.theta);
}

TEST(TrainTest, SameSeedSameParameters) {
  const SyntheticTask &task = small_task();
  ModelDims dims;
  dims.vocab = task.vocab.size();
  TrainConfig cfg;
  cfg.steps = 10;
  cfg.seed = 4;
  cfg.mode = TrainMode::kSftPlusMolpo;
  const TrainResult a = train(task.examples, dims, cfg);
  const TrainResult b = train(task.examples, dims, cfg);
  EXPECT_TRUE(a.params.theta == b.params.theta);
  std::ostringstream ta, tb;
  write_trace_csv(ta, a.trace);
  write_trace_csv(tb, b.trace);
  EXPECT_EQ(ta.str(), tb.str());
  EXPECT_EQ(a.trace.front().step, 0);
  EXPECT_EQ(a.trace.back().step, 10);
}

TEST(TrainTest, FuncgroupPretrainLowersLoss) {
  const SyntheticTask &task = small_task();
  ModelDims dims;
  dims.vocab = task.vocab.size();
  TrainConfig cfg;
  cfg.steps = 60;
  cfg.batch_size = 4;
  cfg.mode = TrainMode::kFuncgroupPretrain;
  const TrainResult r = train(task.examples, dims, cfg);
  EXPECT_LT(r.trace.back().l_func, r.trace.front().l_func);
}

TEST(ParamsTest, SaveLoadRoundTrip) {
  Vocab vocab;
  vocab.add("yes");
  vocab.add("no");
  ToyParams p = random_params(vocab.size(), 8);
  std::stringstream ss;
  p.save(ss, vocab);
  Vocab back_vocab;
  const ToyParams back = ToyParams::load(ss, &back_vocab);
  EXPECT_TRUE(back.theta == p.theta);
  EXPECT_EQ(back_vocab.tokens(), vocab.tokens());
}

TEST(VocabTest, AddAndLookup) {
  Vocab v;
  const int yes = v.add("yes");
  EXPECT_EQ(v.add("yes"), yes);
  EXPECT_EQ(v.id("yes"), yes);
  EXPECT_THROW(v.id("maybe"), std::invalid_argument);
  EXPECT_EQ(v.encode({"yes", "yes"}), std::vector<int>({yes, yes}));
}

TEST(SyntheticTaskTest, MarkerIsOnlyInTheGraph) {
  const SyntheticTask &task = small_task();
  EXPECT_FALSE(task.examples.empty());
  for (const ToyExample &ex: task.examples) {
    EXPECT_TRUE(ex.has_rejected);
    EXPECT_EQ(ex.target.size(), 1u);
    EXPECT_EQ(static_cast<int>(ex.groups.size()), kNumFunctionalGroups);
  }
  const auto &first = task.examples.front().context;
  for (const ToyExample &ex: task.examples) EXPECT_EQ(ex.context, first);
}

}  // namespace
