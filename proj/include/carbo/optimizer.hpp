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

// Budgeted optimization runs: the cost-aware method, its baselines and
// ablations under one loop, replication, and summaries over a cost grid.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "carbo/acquisition.hpp"
#include "carbo/batch_fantasy.hpp"
#include "carbo/cost_model.hpp"
#include "carbo/evaluator.hpp"
#include "carbo/gp_surrogate.hpp"
#include "carbo/search_space.hpp"

namespace carbo {

// carbo        warm start, cost-effective design, cost-cooled acquisition
// ei, eipu     warm start, then EI or EI per unit cost
// ei-cool      warm start, then cost-cooled acquisition (no design)
// design-ei    warm start, cost-effective design, then EI
// design-eipu  warm start, cost-effective design, then EIpu
// random       uniform sampling
enum class Method { kCarbo, kEi, kEipu, kEiCool, kDesignEi, kDesignEipu, kRandom };

std::string_view to_string(Method method);
Method parse_method(std::string_view text);
std::vector<std::string> method_names();

enum class Phase { kCostWarmup, kInitDesign, kOptimize };

std::string_view to_string(Phase phase);
Phase parse_phase(std::string_view text);

struct MethodConfig {
  Method method = Method::kCarbo;
  double budget = 0.0;                // tau, on the wall-clock-equivalent clock
  std::optional<double> tau_init;     // default budget / 8
  std::size_t batch = 1;
  std::size_t n_fantasies = 10;
  std::size_t warm_start = 5;
  std::size_t design_pool_size = 0;   // 0: default_candidate_count(space)
  CostModelKind cost_model = CostModelKind::kWarpedGp;
  int gp_restarts = 3;
  MaximizerOptions maximizer;
  // Ablation switches; unset means the method's own choice.
  std::optional<bool> use_design;
  std::optional<double> alpha_override;

  double resolved_tau_init() const;
  bool resolved_use_design() const;
  // Throws ConfigError on invalid combinations.
  void validate() const;
};

nlohmann::json to_json(const MethodConfig& config);

struct Observation {
  Point point;
  std::optional<double> objective;
  std::string error;
  double cost = 0.0;             // realized
  double cumulative_cost = 0.0;  // total compute so far
  double timestamp = 0.0;        // wall-clock-equivalent completion time
  Phase phase = Phase::kOptimize;
  std::size_t round = 0;
  std::optional<double> alpha;
};

struct Trace {
  std::string method;
  std::uint64_t seed = 0;
  bool simulated = true;
  nlohmann::json config;  // MethodConfig snapshot plus problem description
  std::vector<Observation> observations;
  std::vector<double> best_so_far;  // +inf until the first success
  bool completed = true;
  std::string abort_reason;

  // Index of the best successful observation.
  std::optional<std::size_t> best_index() const;
  double final_best() const;
  double total_cost() const;
  double elapsed() const;
};

// Extra inputs a run needs beyond the config.
struct RunContext {
  // Flop features for the flop-linear and hybrid cost models.
  FeatureMap features;
  Architecture architecture = Architecture::kMlp;
  nlohmann::json problem;  // description stored in the trace
};

// Runs one budgeted optimization. Evaluation seeds, warm-start points and
// proposal seeds depend only on (seed, round), so methods sharing a seed see
// the same warm start. An EvaluatorUnavailable error ends the run early and
// returns the partial trace with completed = false.
Trace run(const MethodConfig& config, const SearchSpace& space,
          Evaluator& evaluator, std::uint64_t seed,
          const RunContext& context = {});

enum class CostAxis { kElapsed, kTotal };

struct Summary {
  std::string method;
  std::size_t requested = 0;
  std::size_t completed = 0;
  double budget = 0.0;
  CostAxis axis = CostAxis::kElapsed;
  std::vector<double> grid;
  std::vector<double> median;  // of best_so_far
  std::vector<double> stdev;
  std::optional<double> optimum;  // known minimum; enables regret columns
  double final_median = 0.0;      // best over each full trace
  double final_stdev = 0.0;
  double median_evaluations = 0.0;
};

// Step-interpolated best_so_far at cost c: right-continuous, +inf before the
// first success.
double best_at(const Trace& trace, double c, CostAxis axis = CostAxis::kElapsed);

// Median and standard deviation over completed traces on `grid_points` evenly
// spaced costs in [0, budget].
Summary summarize(const std::vector<Trace>& traces, double budget,
                  std::optional<double> optimum = std::nullopt,
                  CostAxis axis = CostAxis::kElapsed,
                  std::size_t grid_points = 200);

double median(std::vector<double> values);
double sample_stdev(const std::vector<double>& values);

struct Replication {
  std::vector<Trace> traces;
  Summary summary;
  std::vector<std::string> failures;
};

using EvaluatorFactory = std::function<std::unique_ptr<Evaluator>()>;

// Replication r uses seed derive_seed(master_seed, r).
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t rep);

Replication replicate(const MethodConfig& config, const SearchSpace& space,
                      const EvaluatorFactory& make_evaluator,
                      std::size_t n_reps, std::uint64_t master_seed,
                      const RunContext& context = {},
                      std::optional<double> optimum = std::nullopt,
                      CostAxis axis = CostAxis::kElapsed);

// Budget savings of a over b in percent. Let v be b's final median. If a
// reaches v, savings = (first cost where b reaches v - first cost where a
// does) / budget * 100. Otherwise the result is negative: -(budget - first
// cost where b reaches a's final median) / budget * 100. Identical summaries
// give 0. Summaries on different grids are
// compared on the finer one.
double cost_savings(const Summary& a, const Summary& b);

}  // namespace carbo
