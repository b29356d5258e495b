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

// Cost-effective initial design: spread points over the domain (small fill)
// while spending at most a warm-start budget on evaluating them.
//
// Each selection runs a paired elimination over the candidate pool:
// alternately drop the most expensive remaining candidate (by predicted cost)
// and the one closest to the design, until one survives. The survivor is
// cheap and far from existing points. With a constant cost this is exactly
// greedy maximin (farthest-point) selection.
//
// Tie-breaking, fixed so runs are reproducible:
//   cost elimination      equal cost -> drop the one closer to the design
//   distance elimination  equal distance -> drop the more expensive one
//   anything else         drop the higher candidate index
// With an empty design only cost elimination runs, returning the cheapest
// candidate.

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "carbo/cost_model.hpp"
#include "carbo/evaluator.hpp"
#include "carbo/search_space.hpp"

namespace carbo {

// max over proxy points of the distance to the nearest design point;
// +infinity for an empty design. Design points are rows of `design`.
double fill(const Eigen::MatrixXd& design, const CandidateSet& proxy);
double fill(std::span<const Eigen::VectorXd> design, const CandidateSet& proxy);

// Survivor of the paired elimination given each candidate's predicted cost
// and squared distance to the design (+infinity when the design is empty).
std::size_t eliminate_to_one(std::span<const double> predicted_costs,
                             std::span<const double> design_sq_distances);

struct DesignEntry {
  Point point;
  std::optional<double> objective;
  double cost = 0.0;
  std::size_t round = 0;
  std::string error;
};

struct Design {
  std::vector<DesignEntry> entries;
  double total_cost = 0.0;  // sum of realized costs
  double elapsed = 0.0;     // budget clock: max cost per round, summed
  double fill = std::numeric_limits<double>::infinity();
  std::vector<double> elapsed_before_round;
  std::vector<double> fill_after_round;
  std::size_t rounds = 0;

  std::vector<Eigen::VectorXd> points() const;
};

// Candidate index chosen next for `design` from `candidates` (all rows are
// eligible). Throws StateError if the candidate set is empty.
std::size_t select_next_index(const CandidateSet& candidates,
                              std::span<const Eigen::VectorXd> design,
                              const CostModel& cost);

Point select_next(const CandidateSet& candidates, const Design& current,
                  const CostModel& cost, const SearchSpace& space);

struct DesignOptions {
  // Candidate pool; generated once as Sobol of default_candidate_count()
  // points when unset.
  std::optional<CandidateSet> pool;
  std::size_t pool_size = 0;  // 0: default_candidate_count(space)
  // Cost data already available (e.g. a random warm start); the surrogate
  // is refit on these plus every design evaluation.
  std::vector<CostSample> prior_costs;
};

// Runs rounds of b selections (later picks in a round see earlier ones as
// part of the design), evaluates each round as one batch, refits the cost
// surrogate, and stops once the budget clock reaches tau_init. The clock
// advances by the largest cost in a round, so with b = 1 it is the plain
// cumulative cost.
Design build_design(const SearchSpace& space,
                    const CostSurrogateFactory& cost_factory, double tau_init,
                    std::size_t batch, Evaluator& evaluator, std::uint64_t seed,
                    const DesignOptions& options = {});

}  // namespace carbo
