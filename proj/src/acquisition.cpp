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

#include "carbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "carbo/errors.hpp"
#include "carbo/rng.hpp"

namespace carbo {

double expected_improvement(double mean, double variance, double incumbent) {
  const double improvement = incumbent - mean;
  const double sd = variance > 0.0 ? std::sqrt(variance) : 0.0;
  if (!(sd > 0.0)) return std::max(improvement, 0.0);
  const double z = improvement / sd;
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  constexpr double kInvSqrt2Pi = 0.39894228040143267794;
  const double cdf = 0.5 * std::erfc(-z * kInvSqrt2);
  const double pdf = kInvSqrt2Pi * std::exp(-0.5 * z * z);
  return std::max(improvement * cdf + sd * pdf, 0.0);
}

double eipu(double ei_value, double predicted_cost) {
  return ei_value / predicted_cost;
}

double cooling_alpha(const BudgetState& b) {
  if (!(b.total > b.init)) {
    throw ConfigError("cost cooling needs total budget > initial budget");
  }
  return std::clamp((b.total - b.consumed) / (b.total - b.init), 0.0, 1.0);
}

double ei_cool(double ei_value, double predicted_cost, double alpha) {
  if (alpha == 0.0) return ei_value;
  if (alpha == 1.0) return ei_value / predicted_cost;
  return ei_value / std::pow(predicted_cost, alpha);
}

namespace {

double safe_eval(const AcquisitionFn& acq, const Eigen::VectorXd& x) {
  const double v = acq(as_span(x));
  return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}

}  // namespace

AcquisitionMaximum maximize_acquisition(const AcquisitionFn& acq,
                                        const SearchSpace& space,
                                        std::uint64_t seed,
                                        const MaximizerOptions& options) {
  const std::size_t dim = space.encoded_dim();
  const auto edim = static_cast<Eigen::Index>(dim);
  Rng rng(seed);

  std::vector<Eigen::VectorXd> candidates;
  candidates.reserve(options.sobol_points + options.uniform_points);
  if (options.sobol_points > 0) {
    // Cranley-Patterson rotation keeps the low-discrepancy structure while
    // giving every call a fresh set.
    Eigen::VectorXd shift(edim);
    for (Eigen::Index k = 0; k < edim; ++k) shift[k] = uniform01(rng);
    const Eigen::MatrixXd sob = sobol_points(dim, options.sobol_points);
    Eigen::VectorXd x(edim);
    for (Eigen::Index i = 0; i < sob.rows(); ++i) {
      for (Eigen::Index k = 0; k < edim; ++k) {
        const double v = sob(i, k) + shift[k];
        x[k] = v >= 1.0 ? v - 1.0 : v;
      }
      candidates.push_back(space.snap(as_span(x)));
    }
  }
  {
    Eigen::VectorXd x(edim);
    for (std::size_t i = 0; i < options.uniform_points; ++i) {
      for (Eigen::Index k = 0; k < edim; ++k) x[k] = uniform01(rng);
      candidates.push_back(space.snap(as_span(x)));
    }
  }
  if (candidates.empty()) {
    Eigen::VectorXd x = Eigen::VectorXd::Constant(edim, 0.5);
    candidates.push_back(space.snap(as_span(x)));
  }

  std::vector<double> values(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    values[i] = safe_eval(acq, candidates[i]);
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return values[a] > values[b];
  });

  AcquisitionMaximum best{candidates[order.front()], values[order.front()]};
  const std::size_t starts = std::min(options.refine_starts, order.size());
  for (std::size_t s = 0; s < starts; ++s) {
    Eigen::VectorXd x = candidates[order[s]];
    double fx = values[order[s]];
    double step = options.initial_step;
    for (int it = 0; it < options.refine_steps && step >= options.min_step; ++it) {
      Eigen::VectorXd best_move;
      double best_value = fx;
      for (Eigen::Index k = 0; k < edim; ++k) {
        for (double sign : {1.0, -1.0}) {
          Eigen::VectorXd trial = x;
          trial[k] = std::clamp(trial[k] + sign * step, 0.0, 1.0);
          trial = space.snap(as_span(trial));
          if (trial == x) continue;
          const double v = safe_eval(acq, trial);
          if (v > best_value) {
            best_value = v;
            best_move = std::move(trial);
          }
        }
      }
      if (best_move.size() > 0) {
        x = std::move(best_move);
        fx = best_value;
      } else {
        step *= 0.5;
      }
    }
    if (fx > best.value) best = {x, fx};
  }
  return best;
}

}  // namespace carbo
