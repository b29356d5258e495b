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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "carbo/search_space.hpp"

namespace carbo {

// Outcome of one black-box evaluation. A missing objective marks a failed
// evaluation; its cost still counts against the budget.
struct EvalResult {
  std::optional<double> objective;
  double cost = 0.0;
  std::string error;

  bool ok() const { return objective.has_value(); }
};

// Evaluates a batch of points that are in flight together. Implementations
// may run them concurrently; results come back in input order.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual std::vector<EvalResult> evaluate_batch(
      std::span<const Point> points, std::span<const std::uint64_t> seeds) = 0;
  // True when costs are simulated rather than measured.
  virtual bool simulated() const { return true; }
};

}  // namespace carbo
