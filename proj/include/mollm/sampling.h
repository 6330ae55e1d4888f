//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_SAMPLING_H_
#define MOLLM_SAMPLING_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mollm {

/// One row per molecule, one 0/1 entry per functional group.
using GroupLabel = std::vector<std::uint8_t>;

inline constexpr double kSamplingEpsilon = 1e-6;

struct GroupStats {
  std::vector<double> counts;  // c_g
  double epsilon = kSamplingEpsilon;
  std::vector<double> scale;  // s_g = 1 / (c_g + epsilon)
  std::size_t num_molecules = 0;

  std::size_t num_groups() const { return counts.size(); }
};

struct SamplingWeights {
  std::vector<double> sigma;  // (sum_g x_ig s_g)^2
  std::vector<double> p;      // sigma normalized to sum 1
};

/// Group occurrence counts. An empty list yields `num_groups` zero counts.
GroupStats count_groups(const std::vector<GroupLabel> &labels,
                        std::size_t num_groups = 0,
                        double epsilon = kSamplingEpsilon);

SamplingWeights weights(const std::vector<GroupLabel> &labels, const GroupStats &stats);

/// n i.i.d. draws (with replacement) from weights.p.
std::vector<std::size_t> sample(const SamplingWeights &w, std::size_t n,
                                std::uint64_t seed);

struct GroupFilter {
  std::vector<int> retained;        // ascending
  std::vector<int> dropped_common;  // most prevalent first
  std::vector<int> dropped_rare;
};

/// Drops the num_common most prevalent groups and then the num_rare rarest
/// of the rest; among equal counts the lower index is dropped first.
GroupFilter filter_groups(std::span<const double> counts, int num_common = 11,
                          int num_rare = 1);

/// Restricts each label to the given group columns.
std::vector<GroupLabel> select_groups(const std::vector<GroupLabel> &labels,
                                      std::span<const int> columns);

/// Shannon entropy (nats) of counts normalized to a distribution.
double count_entropy(std::span<const double> counts);

/// Group counts over a multiset of molecule indices.
std::vector<double> sampled_counts(const std::vector<GroupLabel> &labels,
                                   const std::vector<std::size_t> &indices);

}  // namespace mollm

#endif  // MOLLM_SAMPLING_H_
