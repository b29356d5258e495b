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

// Synthetic benchmark problems with known minima and analytic cost fields,
// and the simulated-clock evaluator that runs them.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "carbo/cost_model.hpp"
#include "carbo/evaluator.hpp"
#include "carbo/search_space.hpp"

namespace carbo {

// Raw-coordinate test functions.
double branin(double x1, double x2);
double hartmann3(std::span<const double> x);
double hartmann6(std::span<const double> x);
double rastrigin(std::span<const double> x);

// Cost fields over the encoded cube, with e = distance to the nearest global
// minimizer divided by its maximum over the domain:
//   constant            1
//   cheap-optimum       10^e        (1 at the optimum, 10 farthest away)
//   expensive-optimum   10^(1 - e)  (10 at the optimum, 1 farthest away)
//   flops               linear in MLP flop features (mlp-sim only)
enum class CostField { kConstant, kCheapOptimum, kExpensiveOptimum, kFlops };

std::string_view to_string(CostField field);
CostField parse_cost_field(std::string_view text);

std::vector<std::string> synthetic_objective_names();

class SyntheticProblem {
 public:
  // Objectives: branin, hartmann3, hartmann6, rastrigin-2d, mlp-sim.
  // Throws ConfigError for unknown names or a field the objective lacks.
  static SyntheticProblem make(std::string_view objective, CostField field,
                               double noise_std = 0.0);

  const std::string& name() const { return name_; }
  CostField cost_field() const { return field_; }
  double noise_std() const { return noise_std_; }
  const SearchSpace& space() const { return space_; }

  // Noise-free objective and cost at an encoded point.
  double objective(std::span<const double> encoded) const;
  double cost(std::span<const double> encoded) const;

  double optimum_value() const { return optimum_value_; }
  // Global minimizers, encoded rows.
  const Eigen::MatrixXd& minimizers() const { return minimizers_; }
  // Cost-field lower bound (1.0 for every field).
  double cost_floor() const { return 1.0; }

  // Flop features of an encoded point; empty for problems without one.
  const FeatureMap& features() const { return features_; }

 private:
  std::string name_;
  CostField field_ = CostField::kConstant;
  double noise_std_ = 0.0;
  SearchSpace space_;
  std::function<double(std::span<const double>)> objective_;
  Eigen::MatrixXd minimizers_;
  double optimum_value_ = 0.0;
  double max_distance_ = 1.0;
  FeatureMap features_;
  std::vector<double> flop_coeffs_;  // quad, linear, intercept after scaling
};

// Evaluates synthetic problems on a simulated clock: elapsed advances by the
// largest cost in each batch, total_cost by the sum.
class SimulatedEvaluator final : public Evaluator {
 public:
  explicit SimulatedEvaluator(SyntheticProblem problem);

  std::vector<EvalResult> evaluate_batch(
      std::span<const Point> points,
      std::span<const std::uint64_t> seeds) override;

  const SyntheticProblem& problem() const { return problem_; }
  double elapsed() const { return elapsed_; }
  double total_cost() const { return total_cost_; }
  std::size_t evaluations() const { return evaluations_; }

 private:
  SyntheticProblem problem_;
  double elapsed_ = 0.0;
  double total_cost_ = 0.0;
  std::size_t evaluations_ = 0;
};

}  // namespace carbo
