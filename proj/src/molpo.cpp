//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/molpo.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace mollm {

double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double seq_nll(std::span<const double> lp, Reduction reduction) {
  if (lp.empty()) throw std::invalid_argument("seq_nll: empty sequence");
  double s = 0.0;
  for (double v: lp) s -= v;
  return reduction == Reduction::kSum ? s : s / static_cast<double>(lp.size());
}

double seq_nll_grad(std::span<const double> lp, Reduction reduction) {
  if (lp.empty()) throw std::invalid_argument("seq_nll: empty sequence");
  return reduction == Reduction::kSum ? -1.0 : -1.0 / static_cast<double>(lp.size());
}

double bce_multilabel(std::span<const double> probs, std::span<const double> labels,
                      std::vector<double> *grad) {
  if (probs.size() != labels.size()) {
    throw std::invalid_argument("bce_multilabel: " + std::to_string(probs.size())
                                + " probabilities for " + std::to_string(labels.size())
                                + " labels");
  }
  if (grad) grad->assign(probs.size(), 0.0);
  double loss = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double p = std::clamp(probs[k], kProbClamp, 1.0 - kProbClamp);
    const double y = labels[k];
    loss -= y * std::log(p) + (1.0 - y) * std::log(1.0 - p);
    if (grad && probs[k] > kProbClamp && probs[k] < 1.0 - kProbClamp) {
      (*grad)[k] = -y / p + (1.0 - y) / (1.0 - p);
    }
  }
  return loss;
}

double reward(std::span<const double> lp, double beta) {
  if (lp.empty()) throw std::invalid_argument("reward: empty sequence");
  double s = 0.0;
  for (double v: lp) s += v;
  return beta * s / static_cast<double>(lp.size());
}

MolpoConfig MolpoConfig::from_json(const nlohmann::json &j) {
  MolpoConfig cfg;
  if (!j.is_object()) throw std::invalid_argument("MolPO config must be a JSON object");
  if (auto it = j.find("preset"); it != j.end()) {
    const std::string preset = it->get<std::string>();
    if (preset == "text") cfg = text_preset();
    else if (preset != "table") throw std::invalid_argument("unknown MolPO preset '" + preset + "'");
  }
  auto read = [&](const char *key, double &field) {
    if (auto it = j.find(key); it != j.end()) {
      if (!it->is_number()) throw std::invalid_argument(std::string("MolPO config '") + key + "' must be a number");
      field = it->get<double>();
    }
  };
  read("beta", cfg.beta);
  read("lambda_margin", cfg.lambda_margin);
  read("lambda_clip", cfg.lambda_clip);
  read("c", cfg.c);
  read("ema_decay", cfg.ema_decay);
  cfg.validate();
  return cfg;
}

nlohmann::json MolpoConfig::to_json() const {
  return {{"beta", beta}, {"lambda_margin", lambda_margin}, {"lambda_clip", lambda_clip},
          {"c", c}, {"ema_decay", ema_decay}};
}

void MolpoConfig::validate() const {
  if (!(beta > 0)) throw std::invalid_argument("beta must be positive");
  if (!(lambda_margin >= 0)) throw std::invalid_argument("lambda_margin must be non-negative");
  if (!(lambda_clip > 0)) throw std::invalid_argument("lambda_clip must be positive");
  if (!std::isfinite(c)) throw std::invalid_argument("c must be finite");
  if (!(ema_decay > 0 && ema_decay < 1)) throw std::invalid_argument("ema_decay must lie in (0, 1)");
}

double TaskMarginState::ema(const std::string &task) const {
  auto it = ema_.find(task);
  return it == ema_.end() ? 0.0 : it->second;
}

double TaskMarginState::update(const std::string &task, double r_w, double decay) {
  double &e = ema_[task];
  e = decay * e + (1.0 - decay) * r_w;
  return e;
}

MolpoTerms molpo_terms(double r_w, double r_l, double gamma, double lambda_clip) {
  MolpoTerms t;
  const double diff = r_w - r_l;
  const double clip = lambda_clip * std::abs(r_w);
  t.clipped = diff > clip;
  t.margin = t.clipped ? clip : diff;
  t.gamma = gamma;
  const double z = t.margin - gamma;
  t.loss = softplus(-z);
  const double dz = -sigmoid(-z);
  if (t.clipped) {
    t.d_rw = dz * lambda_clip * (r_w > 0 ? 1.0 : r_w < 0 ? -1.0 : 0.0);
    t.d_rl = 0.0;
  } else {
    t.d_rw = dz;
    t.d_rl = -dz;
  }
  return t;
}

MolpoTerms molpo_loss(double r_w, double r_l, TaskMarginState &state,
                      const std::string &task, const MolpoConfig &cfg) {
  const double ema = state.update(task, r_w, cfg.ema_decay);
  return molpo_terms(r_w, r_l, cfg.lambda_margin * std::abs(ema), cfg.lambda_clip);
}

double gdr(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw std::invalid_argument("gdr: no pairs");
  std::size_t wins = 0;
  for (auto [w, l]: pairs) wins += w > l ? 1 : 0;
  return static_cast<double>(wins) / static_cast<double>(pairs.size());
}

}  // namespace mollm
