//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_TOYMODEL_H_
#define MOLLM_TOYMODEL_H_

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mollm/molgraph.h"
#include "mollm/molpo.h"
#include "mollm/substruct.h"

namespace mollm::toy {

inline constexpr int kEmbedDim = 32;
inline constexpr int kLayers = 2;
inline constexpr int kMaxVocab = 512;
inline constexpr int kNumBondTypes = 4;

/// Atom type index over (element class, aromatic, charge sign).
int atom_type(const Atom &a);
int num_atom_types();

class Vocab {
public:
  static constexpr int kBos = 0;

  Vocab();

  /// Id of token, adding it when new. Throws past kMaxVocab entries.
  int add(std::string_view token);

  /// Throws std::invalid_argument for an unknown token.
  int id(std::string_view token) const;
  bool contains(std::string_view token) const;
  int size() const { return static_cast<int>(tokens_.size()); }
  const std::vector<std::string> &tokens() const { return tokens_; }

  std::vector<int> encode(const std::vector<std::string> &tokens) const;

private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

struct ModelDims {
  int dim = kEmbedDim;
  int layers = kLayers;
  int vocab = 0;
  int groups = kNumFunctionalGroups;
  double mp_eps = 0.0;
};

struct ParamGroup {
  std::string name;
  int offset;
  int rows;
  int cols;

  int size() const { return rows * cols; }
};

/// All trainable parameters in one flat vector; groups are column-major
/// matrices viewed into it.
class ToyParams {
public:
  ToyParams() = default;
  explicit ToyParams(const ModelDims &dims);

  const ModelDims &dims() const { return dims_; }
  const std::vector<ParamGroup> &groups() const { return groups_; }
  const ParamGroup &group(std::string_view name) const;
  int size() const { return static_cast<int>(theta.size()); }

  Eigen::Map<Eigen::MatrixXd> mat(Eigen::VectorXd &v, std::string_view name) const;
  Eigen::Map<const Eigen::MatrixXd> mat(const Eigen::VectorXd &v, std::string_view name) const;
  Eigen::Map<const Eigen::MatrixXd> mat(std::string_view name) const { return mat(theta, name); }

  /// Gaussian weights scaled by fan-in. With zero_output the token output
  /// projection starts at zero, so every token is equally likely.
  void init(std::uint64_t seed, bool zero_output = true);

  void save(std::ostream &out, const Vocab &vocab) const;
  static ToyParams load(std::istream &in, Vocab *vocab);

  Eigen::VectorXd theta;

private:
  ModelDims dims_;
  std::vector<ParamGroup> groups_;
};

struct GraphFeatures {
  std::vector<int> atom_types;
  std::vector<std::array<int, 3>> bonds;  // atom, atom, bond type

  int num_atoms() const { return static_cast<int>(atom_types.size()); }
  int num_bonds() const { return static_cast<int>(bonds.size()); }
};

GraphFeatures featurize(const MolGraph &g);

/// Forward pass of both encoders with the values needed for backprop.
struct GraphEncoding {
  GraphFeatures features;
  std::vector<Eigen::MatrixXd> node_states;  // branch A, per layer, dim x V
  std::vector<Eigen::MatrixXd> pre_update;   // branch A aggregate Z per layer
  Eigen::MatrixXd mix_input;                 // branch B, dim x (V + E)
  Eigen::MatrixXd mix_output;                // branch B, dim x (V + E)
  Eigen::VectorXd graph_a;
  Eigen::VectorXd graph_b;

  /// Rows [h_g^A; h_v^A; h_g^B; h_v^B; h_e^B], (2V + E + 2) x dim.
  Eigen::MatrixXd h() const;

  /// Mean of the rows of h().
  Eigen::VectorXd pooled() const;
  int num_rows() const { return 2 * features.num_atoms() + features.num_bonds() + 2; }
};

GraphEncoding encode(const GraphFeatures &f, const ToyParams &p);
GraphEncoding encode(const MolGraph &g, const ToyParams &p);

/// Accumulates into grad the gradient flowing from d loss / d pooled and
/// d loss / d [graph_a; graph_b] (either may be empty).
void encode_backward(const GraphEncoding &enc, const Eigen::VectorXd &d_pooled,
                     const Eigen::VectorXd &d_graph_ab, const ToyParams &p,
                     Eigen::VectorXd &grad);

struct SequenceScore {
  std::vector<double> log_probs;
  // cached for backprop
  Eigen::VectorXd pooled;
  Eigen::VectorXd bag;
  std::vector<int> context;
  std::vector<int> target;
  Eigen::MatrixXd states;  // dim x T
  Eigen::MatrixXd probs;   // vocab x T
};

/// Autoregressive target log-probabilities given the pooled graph context
/// and the bag of context tokens.
SequenceScore score_pooled(const Eigen::VectorXd &pooled, const std::vector<int> &context,
                           const std::vector<int> &target, const ToyParams &p);

/// score_sequence over the concatenated embedding matrix h.
std::vector<double> score_sequence(const Eigen::MatrixXd &h,
                                   const std::vector<int> &instruction,
                                   const std::vector<int> &selfies,
                                   const std::vector<int> &target, const ToyParams &p);

/// Accumulates parameter gradients for upstream d loss / d log_probs and
/// returns d loss / d pooled.
Eigen::VectorXd score_backward(const SequenceScore &s, const std::vector<double> &d_lp,
                               const ToyParams &p, Eigen::VectorXd &grad);

struct GroupPrediction {
  Eigen::VectorXd input;   // [graph_a; graph_b]
  Eigen::VectorXd hidden;  // tanh layer
  Eigen::VectorXd probs;
};

GroupPrediction predict_groups(const GraphEncoding &enc, const ToyParams &p);

/// Returns d loss / d [graph_a; graph_b] and accumulates head gradients.
Eigen::VectorXd groups_backward(const GroupPrediction &pred, const std::vector<double> &d_probs,
                                const ToyParams &p, Eigen::VectorXd &grad);

struct ToyExample {
  std::string task_id;
  GraphFeatures chosen;
  GraphFeatures rejected;
  bool has_rejected = false;
  std::vector<int> context;
  std::vector<int> target;
  std::vector<double> groups;
};

/// Objective values and their gradient (when grad is non-null) for one
/// example. The MolPO margin uses the supplied gamma, treated as a constant.
double sft_objective(const ToyExample &ex, const ToyParams &p, Eigen::VectorXd *grad,
                     double *reward_out = nullptr, double beta = 1.0);
double molpo_objective(const ToyExample &ex, const ToyParams &p, double gamma,
                       const MolpoConfig &cfg, Eigen::VectorXd *grad,
                       double *r_w = nullptr, double *r_l = nullptr);
double funcgroup_objective(const ToyExample &ex, const ToyParams &p, Eigen::VectorXd *grad);

/// Rewards of both graphs for the example's target.
std::pair<double, double> pair_rewards(const ToyExample &ex, const ToyParams &p, double beta);

double evaluate_gdr(const std::vector<ToyExample> &data, const ToyParams &p, double beta);

enum class TrainMode : std::uint8_t { kSftOnly, kSftPlusMolpo, kFuncgroupPretrain };

TrainMode parse_train_mode(std::string_view text);
std::string_view to_string(TrainMode mode);

struct TrainConfig {
  TrainMode mode = TrainMode::kSftOnly;
  MolpoConfig molpo;
  int steps = 300;
  int batch_size = 16;
  double learning_rate = 0.01;
  std::uint64_t seed = 0;
  int trace_every = 10;
  bool zero_output_init = true;
};

struct TraceRow {
  int step;
  double l_sft;
  double l_molpo;
  double gdr;
  double l_func;
};

struct TrainResult {
  ToyParams params;
  std::vector<TraceRow> trace;
};

class TrainingDiverged: public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Adam on minibatches drawn from per-epoch shuffles. Trace rows hold
/// full-dataset averages at step 0, every trace_every steps and at the end.
/// With mode kSftPlusMolpo and c == 0 the parameter trajectory equals kSftOnly.
TrainResult train(const std::vector<ToyExample> &data, const ModelDims &dims,
                  const TrainConfig &cfg);

void write_trace_csv(std::ostream &out, const std::vector<TraceRow> &trace);

/// Desk-scale graph-utilization task. Each random molecule carries either a
/// trisilyl or a triboryl chain and the target ("yes"/"no") says which; the
/// SELFIES context is left blank, so only the graph carries the answer.
/// Rejected graphs come from MACCS-key perturbation that leaves the marker
/// intact, with growing and shrinking edits balanced across examples.
struct SyntheticTask {
  Vocab vocab;
  std::vector<ToyExample> examples;
};

SyntheticTask make_synthetic_task(int n, std::uint64_t seed, const KeyTable &table,
                                  double ratio = 0.3);

}  // namespace mollm::toy

#endif  // MOLLM_TOYMODEL_H_
