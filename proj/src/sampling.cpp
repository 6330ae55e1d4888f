//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "mollm/sampling.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mollm/random.h"

namespace mollm {

GroupStats count_groups(const std::vector<GroupLabel> &labels,
                        std::size_t num_groups, double epsilon) {
  if (!labels.empty()) {
    if (num_groups != 0 && labels.front().size() != num_groups) {
      throw std::invalid_argument("label width does not match the group count");
    }
    num_groups = labels.front().size();
  }
  GroupStats stats;
  stats.epsilon = epsilon;
  stats.counts.assign(num_groups, 0.0);
  stats.num_molecules = labels.size();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].size() != num_groups) {
      throw std::invalid_argument("label " + std::to_string(i) + " has "
                                  + std::to_string(labels[i].size())
                                  + " groups, expected "
                                  + std::to_string(num_groups));
    }
    for (std::size_t g = 0; g < num_groups; ++g) {
      if (labels[i][g]) stats.counts[g] += 1.0;
    }
  }
  stats.scale.resize(num_groups);
  for (std::size_t g = 0; g < num_groups; ++g) {
    stats.scale[g] = 1.0 / (stats.counts[g] + epsilon);
  }
  return stats;
}

SamplingWeights weights(const std::vector<GroupLabel> &labels, const GroupStats &stats) {
  SamplingWeights w;
  w.sigma.resize(labels.size());
  double total = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].size() != stats.num_groups()) {
      throw std::invalid_argument("label " + std::to_string(i)
                                  + " does not match the group statistics");
    }
    double s = 0.0;
    for (std::size_t g = 0; g < labels[i].size(); ++g) {
      if (labels[i][g]) s += stats.scale[g];
    }
    w.sigma[i] = s * s;
    total += w.sigma[i];
  }
  w.p.assign(labels.size(), 0.0);
  if (total > 0.0) {
    for (std::size_t i = 0; i < labels.size(); ++i) w.p[i] = w.sigma[i] / total;
  }
  return w;
}

std::vector<std::size_t> sample(const SamplingWeights &w, std::size_t n,
                                std::uint64_t seed) {
  std::vector<double> cdf(w.p.size());
  std::partial_sum(w.p.begin(), w.p.end(), cdf.begin());
  if (cdf.empty() || !(cdf.back() > 0.0)) {
    throw std::invalid_argument("cannot sample: all weights are zero");
  }
  const double total = cdf.back();
  Rng rng(seed);
  std::vector<std::size_t> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double u = rng.uniform01() * total;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cdf.begin());
    if (i >= cdf.size()) {
      // u rounded up to the total
      i = cdf.size() - 1;
      while (w.p[i] == 0.0) --i;
    }
    out[k] = i;
  }
  return out;
}

GroupFilter filter_groups(std::span<const double> counts, int num_common, int num_rare) {
  const int g = static_cast<int>(counts.size());
  if (g < num_common + num_rare + 1) {
    throw std::invalid_argument("filter_groups needs at least "
                                + std::to_string(num_common + num_rare + 1)
                                + " groups, got " + std::to_string(g));
  }
  std::vector<int> order(g);
  std::iota(order.begin(), order.end(), 0);
  GroupFilter f;
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return counts[a] > counts[b]; });
  f.dropped_common.assign(order.begin(), order.begin() + num_common);

  std::vector<int> rest(order.begin() + num_common, order.end());
  std::stable_sort(rest.begin(), rest.end(), [&](int a, int b) {
    return counts[a] < counts[b] || (counts[a] == counts[b] && a < b);
  });
  f.dropped_rare.assign(rest.begin(), rest.begin() + num_rare);
  f.retained.assign(rest.begin() + num_rare, rest.end());
  std::sort(f.retained.begin(), f.retained.end());
  return f;
}

std::vector<GroupLabel> select_groups(const std::vector<GroupLabel> &labels,
                                      std::span<const int> columns) {
  std::vector<GroupLabel> out;
  out.reserve(labels.size());
  for (const GroupLabel &l: labels) {
    GroupLabel row;
    row.reserve(columns.size());
    for (int c: columns) {
      if (c < 0 || static_cast<std::size_t>(c) >= l.size()) {
        throw std::out_of_range("group column " + std::to_string(c) + " out of range");
      }
      row.push_back(l[c]);
    }
    out.push_back(std::move(row));
  }
  return out;
}

double count_entropy(std::span<const double> counts) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double c: counts) {
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

std::vector<double> sampled_counts(const std::vector<GroupLabel> &labels,
                                   const std::vector<std::size_t> &indices) {
  std::vector<double> counts(labels.empty() ? 0 : labels.front().size(), 0.0);
  for (std::size_t i: indices) {
    for (std::size_t g = 0; g < counts.size(); ++g) {
      if (labels[i][g]) counts[g] += 1.0;
    }
  }
  return counts;
}

}  // namespace mollm
