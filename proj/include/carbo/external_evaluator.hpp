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

// Black boxes run as child processes. Each evaluation spawns the command,
// writes one request line to its stdin and reads one response line from its
// stdout:
//
//   request   {"id": 3, "params": {"lr": 0.01, "layers": 2, "act": "relu"}}
//   response  {"id": 3, "objective": 0.173, "cost": 12.5}
//
// Numbers are written in the shortest decimal form that parses back to the
// same double. Unknown response fields are ignored. A response without a
// numeric objective, an id mismatch, unparsable output, a timeout or a crash
// all produce a failed evaluation whose cost is the measured wall time.
// A command that cannot be started raises EvaluatorUnavailable.

#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "carbo/evaluator.hpp"
#include "carbo/search_space.hpp"

namespace carbo {

enum class CostSource { kReported, kWallClock };

std::string_view to_string(CostSource source);
CostSource parse_cost_source(std::string_view text);

struct ExternalProblem {
  std::vector<std::string> command;  // argv; argv[0] is looked up on PATH
  double timeout_seconds = 600.0;
  // kReported uses the response's cost when it is a positive number and
  // falls back to wall time otherwise.
  CostSource cost_source = CostSource::kReported;
};

class ExternalEvaluator final : public Evaluator {
 public:
  explicit ExternalEvaluator(ExternalProblem problem);

  // Runs the batch concurrently, one process per point.
  std::vector<EvalResult> evaluate_batch(
      std::span<const Point> points,
      std::span<const std::uint64_t> seeds) override;

  bool simulated() const override {
    return problem_.cost_source == CostSource::kReported;
  }
  const ExternalProblem& problem() const { return problem_; }

 private:
  ExternalProblem problem_;
  std::uint64_t next_id_ = 0;
};

// Parses one response line for request `id`; exposed for testing.
// `wall_seconds` is the measured duration.
EvalResult parse_response(const std::string& line, std::uint64_t id,
                          double wall_seconds, CostSource source);

}  // namespace carbo
