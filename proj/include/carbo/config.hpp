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

// Experiment configuration files:
//
//   {
//     "problems": [
//       {"name": "branin-cheap", "type": "synthetic", "objective": "branin",
//        "cost_field": "cheap-optimum", "noise_std": 0.0},
//       {"name": "svm", "type": "external", "command": ["python3", "svm.py"],
//        "timeout": 600, "cost_source": "reported",
//        "search_space": {"dimensions": [...]}}
//     ],
//     "method": {"method": "carbo", "budget": 60, "tau_init": 7.5,
//                "batch": 1, "n_fantasies": 10, "warm_start": 5,
//                "cost_model": "warped-gp", "gp_restarts": 3,
//                "design_pool_size": 0,
//                "candidates": {"sobol": 2048, "uniform": 512}},
//     "reps": 5,
//     "seed": 0
//   }
//
// "problem" (a single object) may replace "problems". An external problem
// may give "search_space_file" (relative to the config file) instead of an
// inline space. Unknown keys are rejected.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carbo/external_evaluator.hpp"
#include "carbo/optimizer.hpp"
#include "carbo/problems.hpp"
#include "carbo/search_space.hpp"

namespace carbo {

struct ProblemSpec {
  std::string name;
  std::optional<SyntheticProblem> synthetic;
  std::optional<ExternalProblem> external;
  SearchSpace space;

  std::unique_ptr<Evaluator> make_evaluator() const;
  RunContext context() const;
  std::optional<double> optimum() const;
  nlohmann::json describe() const;
};

ProblemSpec synthetic_problem_spec(std::string name, SyntheticProblem problem);

struct ExperimentConfig {
  std::vector<ProblemSpec> problems;
  MethodConfig method;
  std::size_t reps = 1;
  std::uint64_t seed = 0;
};

// Throws ConfigError prefixed with `source` and the offending key.
ExperimentConfig parse_config(const nlohmann::json& doc,
                              const std::filesystem::path& base_dir,
                              const std::string& source = "<config>");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace carbo
