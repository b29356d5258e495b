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

#include "carbo/config.hpp"

#include <fstream>
#include <set>
#include <string_view>

#include "carbo/errors.hpp"

namespace carbo {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
  }

  void allow(std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : obj_.items()) {
      if (!ok.count(k)) throw ConfigError(where_ + ": unknown key '" + k + "'");
    }
  }

  bool has(const char* key) const { return obj_.contains(key); }

  const json& at(const char* key) const {
    if (!obj_.contains(key)) throw ConfigError(where_ + ": missing key '" + key + "'");
    return obj_.at(key);
  }

  template <typename T>
  T get(const char* key) const {
    try {
      return at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where_ + ": key '" + key + "' has the wrong type");
    }
  }

  template <typename T>
  T get_or(const char* key, T fallback) const {
    return has(key) ? get<T>(key) : fallback;
  }

  std::size_t count(const char* key, std::size_t fallback) const {
    if (!has(key)) return fallback;
    const json& v = at(key);
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
      throw ConfigError(where_ + ": key '" + key + "' must be a non-negative integer");
    }
    return v.get<std::size_t>();
  }

  const std::string& where() const { return where_; }

 private:
  const json& obj_;
  std::string where_;
};

ProblemSpec parse_problem(const json& doc, const std::filesystem::path& base,
                          const std::string& where) {
  Reader r(doc, where);
  const auto type = r.get_or<std::string>("type", "synthetic");
  ProblemSpec spec;
  try {
    if (type == "synthetic") {
      r.allow({"name", "type", "objective", "cost_field", "noise_std"});
      const auto objective = r.get<std::string>("objective");
      SyntheticProblem p = SyntheticProblem::make(
          objective, parse_cost_field(r.get_or<std::string>("cost_field", "constant")),
          r.get_or<double>("noise_std", 0.0));
      spec = synthetic_problem_spec(
          r.get_or<std::string>("name", objective + "-" + std::string(to_string(p.cost_field()))),
          std::move(p));
    } else if (type == "external") {
      r.allow({"name", "type", "command", "timeout", "cost_source", "search_space",
               "search_space_file"});
      ExternalProblem ext;
      ext.command = r.get<std::vector<std::string>>("command");
      ext.timeout_seconds = r.get_or<double>("timeout", ext.timeout_seconds);
      ext.cost_source = parse_cost_source(r.get_or<std::string>("cost_source", "reported"));
      if (r.has("search_space") == r.has("search_space_file")) {
        throw ConfigError(where + ": give exactly one of 'search_space' and 'search_space_file'");
      }
      if (r.has("search_space")) {
        spec.space = parse_search_space(r.at("search_space"), where + ".search_space");
      } else {
        std::filesystem::path p = r.get<std::string>("search_space_file");
        if (p.is_relative()) p = base / p;
        spec.space = load_search_space(p);
      }
      if (ext.command.empty()) throw ConfigError(where + ": 'command' must not be empty");
      spec.name = r.get_or<std::string>("name", "external");
      spec.external = std::move(ext);
    } else {
      throw ConfigError(where + ": unknown problem type '" + type + "'");
    }
  } catch (const ConfigError& e) {
    if (std::string_view(e.what()).starts_with(where)) throw;
    throw ConfigError(where + ": " + e.what());
  } catch (const Error& e) {
    throw ConfigError(where + ": " + e.what());
  }
  return spec;
}

MethodConfig parse_method_config(const json& doc, const std::string& where) {
  Reader r(doc, where);
  r.allow({"method", "budget", "tau_init", "batch", "n_fantasies", "warm_start",
           "cost_model", "gp_restarts", "design_pool_size", "candidates", "use_design",
           "alpha"});
  MethodConfig c;
  if (r.has("method")) c.method = parse_method(r.get<std::string>("method"));
  c.budget = r.get_or<double>("budget", 0.0);
  if (r.has("tau_init")) c.tau_init = r.get<double>("tau_init");
  c.batch = r.count("batch", c.batch);
  c.n_fantasies = r.count("n_fantasies", c.n_fantasies);
  c.warm_start = r.count("warm_start", c.warm_start);
  c.design_pool_size = r.count("design_pool_size", c.design_pool_size);
  c.gp_restarts = static_cast<int>(r.count("gp_restarts", static_cast<std::size_t>(c.gp_restarts)));
  if (r.has("cost_model")) c.cost_model = parse_cost_model_kind(r.get<std::string>("cost_model"));
  if (r.has("use_design")) c.use_design = r.get<bool>("use_design");
  if (r.has("alpha")) c.alpha_override = r.get<double>("alpha");
  if (r.has("candidates")) {
    Reader cand(r.at("candidates"), where + ".candidates");
    cand.allow({"sobol", "uniform", "refine_starts"});
    c.maximizer.sobol_points = cand.count("sobol", c.maximizer.sobol_points);
    c.maximizer.uniform_points = cand.count("uniform", c.maximizer.uniform_points);
    c.maximizer.refine_starts = cand.count("refine_starts", c.maximizer.refine_starts);
    if (c.maximizer.sobol_points + c.maximizer.uniform_points == 0) {
      throw ConfigError(where + ".candidates: need at least one candidate");
    }
  }
  return c;
}

}  // namespace

ProblemSpec synthetic_problem_spec(std::string name, SyntheticProblem problem) {
  ProblemSpec spec;
  spec.name = std::move(name);
  spec.space = problem.space();
  spec.synthetic = std::move(problem);
  return spec;
}

std::unique_ptr<Evaluator> ProblemSpec::make_evaluator() const {
  if (synthetic) return std::make_unique<SimulatedEvaluator>(*synthetic);
  return std::make_unique<ExternalEvaluator>(*external);
}

RunContext ProblemSpec::context() const {
  RunContext ctx;
  if (synthetic) ctx.features = synthetic->features();
  ctx.problem = describe();
  return ctx;
}

std::optional<double> ProblemSpec::optimum() const {
  if (synthetic) return synthetic->optimum_value();
  return std::nullopt;
}

nlohmann::json ProblemSpec::describe() const {
  json j;
  j["name"] = name;
  if (synthetic) {
    j["type"] = "synthetic";
    j["objective"] = synthetic->name();
    j["cost_field"] = to_string(synthetic->cost_field());
    j["noise_std"] = synthetic->noise_std();
  } else if (external) {
    j["type"] = "external";
    j["command"] = external->command;
    j["timeout"] = external->timeout_seconds;
    j["cost_source"] = to_string(external->cost_source);
  }
  return j;
}

ExperimentConfig parse_config(const json& doc, const std::filesystem::path& base_dir,
                              const std::string& source) {
  Reader r(doc, source);
  r.allow({"problem", "problems", "method", "reps", "seed"});
  ExperimentConfig cfg;
  if (r.has("problem") && r.has("problems")) {
    throw ConfigError(source + ": give 'problem' or 'problems', not both");
  }
  if (r.has("problem")) {
    cfg.problems.push_back(parse_problem(r.at("problem"), base_dir, source + ".problem"));
  } else if (r.has("problems")) {
    const json& list = r.at("problems");
    if (!list.is_array() || list.empty()) {
      throw ConfigError(source + ": 'problems' must be a non-empty array");
    }
    for (std::size_t i = 0; i < list.size(); ++i) {
      cfg.problems.push_back(parse_problem(list[i], base_dir,
                                           source + ".problems[" + std::to_string(i) + "]"));
    }
  }
  if (r.has("method")) cfg.method = parse_method_config(r.at("method"), source + ".method");
  cfg.reps = r.count("reps", cfg.reps);
  cfg.seed = r.get_or<std::uint64_t>("seed", cfg.seed);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": invalid JSON: " + e.what());
  }
  return parse_config(doc, path.parent_path(), path.string());
}

}  // namespace carbo
