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

#pragma once

#include <functional>

#include <Eigen/Dense>

namespace carbo::detail {

struct BoxOptimizerOptions {
  int max_iterations = 200;
  // Stop once the projected gradient's infinity norm drops below this.
  double gradient_tolerance = 1e-6;
  // Looser bound accepted after three steps of negligible improvement.
  double stall_gradient_tolerance = 1e-3;
};

struct BoxOptimizerResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  bool converged = false;
};

// Returns f(x) and writes its gradient. May return -inf to reject a point.
using Objective = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd*)>;

// Maximizes f over the box [lo, hi] with a projected BFGS method: the inverse
// Hessian approximation acts on the free variables, variables pinned at a
// bound with an outward gradient are held fixed, and steps are projected
// back into the box under an Armijo backtracking search.
BoxOptimizerResult maximize_in_box(const Objective& f, Eigen::VectorXd x0,
                                   const Eigen::VectorXd& lo,
                                   const Eigen::VectorXd& hi,
                                   const BoxOptimizerOptions& options = {});

}  // namespace carbo::detail
