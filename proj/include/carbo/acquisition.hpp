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

// Expected improvement and its cost-aware variants, plus the acquisition
// maximizer shared by every optimization loop.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>

#include <Eigen/Dense>

#include "carbo/search_space.hpp"

namespace carbo {

// E[max(incumbent - f, 0)] for f ~ N(mean, variance), minimization.
double expected_improvement(double mean, double variance, double incumbent);

// EI per unit cost.
double eipu(double ei_value, double predicted_cost);

// Budget bookkeeping for cost cooling. `consumed` is the realized cost when
// the proposal is made; `init` is the consumed cost at the start of the
// optimization phase, where the schedule starts at 1.
struct BudgetState {
  double total = 0.0;
  double init = 0.0;
  double consumed = 0.0;
};

// (total - consumed) / (total - init), clamped to [0, 1]. Throws ConfigError
// when total <= init.
double cooling_alpha(const BudgetState& budget);

// EI / cost^alpha: EIpu at alpha = 1, EI at alpha = 0.
double ei_cool(double ei_value, double predicted_cost, double alpha);

struct MaximizerOptions {
  std::size_t sobol_points = 2048;
  std::size_t uniform_points = 512;
  std::size_t refine_starts = 5;
  int refine_steps = 50;
  double initial_step = 0.1;
  double min_step = 1e-4;
};

using AcquisitionFn = std::function<double(std::span<const double>)>;

struct AcquisitionMaximum {
  Eigen::VectorXd point;  // snapped encoded point
  double value = 0.0;
};

// Scores a seeded candidate set (a randomly shifted Sobol set plus uniform
// points), then polishes the best few by coordinate pattern search with a
// halving step. Ties keep the earliest candidate. Deterministic given seed.
AcquisitionMaximum maximize_acquisition(const AcquisitionFn& acq,
                                        const SearchSpace& space,
                                        std::uint64_t seed,
                                        const MaximizerOptions& options = {});

}  // namespace carbo
