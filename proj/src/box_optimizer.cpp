// Copyright 2026 The carbo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================

#include "carbo/detail/box_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace carbo::detail {

namespace {

Eigen::VectorXd project(const Eigen::VectorXd& x, const Eigen::VectorXd& lo,
                        const Eigen::VectorXd& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

// Infinity norm of P(x + g) - x: zero exactly at a KKT point of the box
// constrained maximization.
double projected_gradient_norm(const Eigen::VectorXd& x,
                               const Eigen::VectorXd& g,
                               const Eigen::VectorXd& lo,
                               const Eigen::VectorXd& hi) {
  return (project(x + g, lo, hi) - x).lpNorm<Eigen::Infinity>();
}

}  // namespace

BoxOptimizerResult maximize_in_box(const Objective& f, Eigen::VectorXd x0,
                                   const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi,
                                   const BoxOptimizerOptions& options) {
  const Eigen::Index n = x0.size();
  BoxOptimizerResult res;
  res.x = project(x0, lo, hi);
  res.gradient = Eigen::VectorXd::Zero(n);
  res.value = f(res.x, &res.gradient);
  if (!std::isfinite(res.value)) return res;

  Eigen::MatrixXd inv_hessian = Eigen::MatrixXd::Identity(n, n);
  bool fresh = true;
  int stalled = 0;
  constexpr double kBoundEps = 1e-12;

  for (int it = 0; it < options.max_iterations; ++it) {
    res.iterations = it + 1;
    const Eigen::VectorXd& g = res.gradient;
    if (projected_gradient_norm(res.x, g, lo, hi) < options.gradient_tolerance) {
      res.converged = true;
      break;
    }

    Eigen::VectorXd free_mask = Eigen::VectorXd::Ones(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lo = res.x[i] <= lo[i] + kBoundEps && g[i] < 0.0;
      const bool at_hi = res.x[i] >= hi[i] - kBoundEps && g[i] > 0.0;
      if (at_lo || at_hi) free_mask[i] = 0.0;
    }
    const Eigen::VectorXd g_free = g.cwiseProduct(free_mask);
    Eigen::VectorXd dir = (inv_hessian * g_free).cwiseProduct(free_mask);
    if (dir.dot(g_free) <= 0.0) {
      inv_hessian.setIdentity();
      fresh = true;
      dir = g_free;
    }
    const double dir_norm = dir.lpNorm<Eigen::Infinity>();
    if (dir_norm == 0.0) {
      res.converged = true;
      break;
    }

    double step = std::min(1.0, 2.0 / dir_norm);
    Eigen::VectorXd x_new;
    Eigen::VectorXd g_new(n);
    double f_new = -std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int ls = 0; ls < 20; ++ls) {
      x_new = project(res.x + step * dir, lo, hi);
      const double gain = g.dot(x_new - res.x);
      f_new = f(x_new, &g_new);
      if (std::isfinite(f_new) && f_new >= res.value + 1e-4 * gain && gain > 0.0) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (projected_gradient_norm(res.x, g, lo, hi) < options.stall_gradient_tolerance) {
        res.converged = true;
        break;
      }
      if (!fresh) {
        inv_hessian.setIdentity();
        fresh = true;
        continue;
      }
      break;
    }

    // BFGS on the minimization of -f.
    const Eigen::VectorXd s = x_new - res.x;
    // Restricted to the free variables so pinned coordinates do not couple
    // into the curvature estimate.
    const Eigen::VectorXd y = -(g_new - g).cwiseProduct(free_mask);
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      // Shanno-Phua scaling of a fresh approximation.
      if (fresh) inv_hessian = (sy / y.squaredNorm()) * eye;
      inv_hessian = (eye - rho * s * y.transpose()) * inv_hessian *
                        (eye - rho * y * s.transpose()) +
                    rho * s * s.transpose();
      fresh = false;
    }
    const double improvement = f_new - res.value;
    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;
    // Round-off in f stalls the line search near a flat optimum; stop after
    // a few negligible steps once the gradient is small.
    stalled = improvement <= 1e-10 * (1.0 + std::abs(res.value)) ? stalled + 1 : 0;
    const double pg = projected_gradient_norm(res.x, res.gradient, lo, hi);
    if ((stalled >= 1 && pg < std::max(options.gradient_tolerance, 1e-4)) ||
        (stalled >= 3 && pg < options.stall_gradient_tolerance)) {
      res.converged = true;
      break;
    }
  }
  return res;
}

}  // namespace carbo::detail
