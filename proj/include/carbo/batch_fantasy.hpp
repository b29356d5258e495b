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

// Batch proposals by fantasizing. The first point maximizes the acquisition
// on the real surrogate; each later point maximizes the acquisition averaged
// over n_f fantasy surrogates, each conditioned on its own posterior draws at
// the points already in the batch. Kernel hyperparameters stay frozen and
// the cost model is shared across fantasies.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "carbo/acquisition.hpp"
#include "carbo/cost_model.hpp"
#include "carbo/gp_surrogate.hpp"
#include "carbo/search_space.hpp"

namespace carbo {

// kPosteriorMean replaces each draw by the posterior mean (Kriging believer).
enum class FantasyDraw { kSample, kPosteriorMean };

struct FantasySet {
  std::vector<GpSurrogate> surrogates;
  std::vector<double> incumbents;  // min of real and fantasy targets
  // Set when every surrogate shares the first one's covariance, which lets
  // the acquisition compute the predictive variance once.
  bool shared_covariance = false;

  std::size_t size() const { return surrogates.size(); }
};

struct BatchOptions {
  std::size_t n_fantasies = 10;
  FantasyDraw draw = FantasyDraw::kSample;
  int duplicate_retries = 3;
  MaximizerOptions maximizer;
};

struct BatchProposal {
  std::vector<Point> points;
  // State after the last conditioning step: b - 1 fantasy observations per
  // surrogate. Empty when b = 1.
  FantasySet fantasies;
  std::size_t accepted_duplicates = 0;
};

// Fantasy-averaged EI / cost^alpha at p.
double fantasy_acquisition(const FantasySet& set, const CostModel& cost,
                           double alpha, std::span<const double> p);

// Throws ArgumentError when b or n_fantasies is zero, or when `g` has no
// training data.
BatchProposal propose_batch(const GpSurrogate& g, const CostModel& cost,
                            double alpha, std::size_t b,
                            const SearchSpace& space, std::uint64_t seed,
                            const BatchOptions& options = {});

}  // namespace carbo
