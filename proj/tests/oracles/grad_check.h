//
// mollm-toolkit - Copyright 2026 The mollm-toolkit Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLLM_TESTS_GRAD_CHECK_H_
#define MOLLM_TESTS_GRAD_CHECK_H_

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

namespace mollm::oracle {

/// Relative error |a - n| / max(|a|, |n|, floor) between the analytic
/// directional derivative a = grad . dir and the fourth-order central
/// difference n of f at x along dir.
template <class F>
double fd_directional_error(F &&f, const Eigen::VectorXd &x, const Eigen::VectorXd &dir,
                            double analytic, double h = 1e-4, double floor = 1e-6) {
  auto at = [&](double t) { return f(x + t * dir); };
  const double numeric = (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
  const double scale = std::max({std::abs(analytic), std::abs(numeric), floor});
  return std::abs(analytic - numeric) / scale;
}

/// Unit-norm Gaussian direction supported on [offset, offset + count).
template <class Gen>
Eigen::VectorXd random_direction(int size, int offset, int count, Gen &&normal) {
  Eigen::VectorXd dir = Eigen::VectorXd::Zero(size);
  for (int i = offset; i < offset + count; ++i) dir[i] = normal();
  return dir / dir.norm();
}

}  // namespace mollm::oracle

#endif  // MOLLM_TESTS_GRAD_CHECK_H_
