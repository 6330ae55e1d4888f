//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_MOLPO_H_
#define MOLLM_MOLPO_H_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

namespace mollm {

enum class Reduction : std::uint8_t { kSum, kMean };

/// -sum(lp), or that divided by |lp|. Throws on an empty sequence.
double seq_nll(std::span<const double> lp, Reduction reduction = Reduction::kSum);

/// d seq_nll / d lp_t, the same for every position.
double seq_nll_grad(std::span<const double> lp, Reduction reduction = Reduction::kSum);

inline constexpr double kProbClamp = 1e-7;

/// Summed binary cross-entropy with probabilities clamped to
/// [1e-7, 1 - 1e-7]. `grad`, when given, receives d loss / d probs (zero
/// where the clamp is active).
double bce_multilabel(std::span<const double> probs, std::span<const double> labels,
                      std::vector<double> *grad = nullptr);

/// beta * mean(lp). Throws on an empty sequence.
double reward(std::span<const double> lp, double beta);

struct MolpoConfig {
  double beta = 1.0;
  double lambda_margin = 0.25;
  double lambda_clip = 1.0;
  double c = 0.25;
  double ema_decay = 0.99;

  /// Defaults (lambda_margin 0.25).
  static MolpoConfig table_preset() { return {}; }

  /// Same with lambda_margin 0.5.
  static MolpoConfig text_preset() {
    MolpoConfig cfg;
    cfg.lambda_margin = 0.5;
    return cfg;
  }

  /// Overlays the keys present in j (beta, lambda_margin, lambda_clip, c,
  /// ema_decay, and "preset": "table" | "text") on the defaults and validates.
  static MolpoConfig from_json(const nlohmann::json &j);
  nlohmann::json to_json() const;
  void validate() const;
};

/// Per-task exponential moving average of the chosen reward, starting at 0.
class TaskMarginState {
public:
  double ema(const std::string &task) const;
  double update(const std::string &task, double r_w, double decay);
  void set(const std::string &task, double value) { ema_[task] = value; }

private:
  std::map<std::string, double> ema_;
};

struct MolpoTerms {
  double loss = 0.0;
  double margin = 0.0;  // min(r_w - r_l, lambda_clip * |r_w|)
  double gamma = 0.0;
  bool clipped = false;
  double d_rw = 0.0;  // gradients with gamma held fixed
  double d_rl = 0.0;
};

/// -log sigmoid(min(r_w - r_l, lambda_clip |r_w|) - gamma). At the kink the
/// unclipped branch is taken.
MolpoTerms molpo_terms(double r_w, double r_l, double gamma, double lambda_clip);

/// Updates the task's EMA with r_w, sets gamma = lambda_margin * |EMA| and
/// evaluates molpo_terms.
MolpoTerms molpo_loss(double r_w, double r_l, TaskMarginState &state,
                      const std::string &task, const MolpoConfig &cfg);

inline double combined_loss(double l_sft, double l_molpo, double c) {
  return l_sft + c * l_molpo;
}

/// Fraction of pairs with r_w strictly greater than r_l. Throws when empty.
double gdr(std::span<const std::pair<double, double>> pairs);

double softplus(double x);
double sigmoid(double x);

}  // namespace mollm

#endif  // MOLLM_MOLPO_H_
