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

// carbo: budgeted optimization runs, comparisons and plot tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carbo/config.hpp"
#include "carbo/errors.hpp"
#include "carbo/initial_design.hpp"
#include "carbo/optimizer.hpp"
#include "carbo/trace_io.hpp"

namespace fs = std::filesystem;
using namespace carbo;

namespace {

constexpr int kUsageError = 2;
constexpr int kRuntimeError = 1;

// Raised for configurations the command line cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string problem;
  std::string cost_field = "constant";
  double noise = 0.0;
  std::vector<std::string> methods;
  std::optional<double> budget;
  std::optional<double> tau_init;
  std::optional<std::size_t> batch;
  std::optional<std::size_t> reps;
  std::optional<std::uint64_t> seed;
  std::string out = "carbo-out";
  bool simulated = false;
  bool wall_clock = false;
  std::string axis = "elapsed";
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "Experiment config file (JSON)");
  cmd->add_option("--problem", o.problem,
                  "Synthetic objective: branin, hartmann3, hartmann6, rastrigin-2d, mlp-sim");
  cmd->add_option("--cost-field", o.cost_field,
                  "Cost field for --problem: constant, cheap-optimum, expensive-optimum, flops");
  cmd->add_option("--noise", o.noise, "Observation noise std for --problem");
  cmd->add_option("--budget", o.budget, "Total budget tau");
  cmd->add_option("--tau-init", o.tau_init, "Initial-design budget (default tau/8)");
  cmd->add_option("--batch", o.batch, "Batch size b");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--out", o.out, "Output directory");
  auto* sim = cmd->add_flag("--simulated", o.simulated, "Use reported or simulated costs");
  auto* wall = cmd->add_flag("--wall-clock", o.wall_clock,
                             "Measure external evaluations by wall time");
  sim->excludes(wall);
}

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = load_config(o.config);
  }
  if (!o.problem.empty()) {
    if (!cfg.problems.empty()) throw UsageError("give either --config problems or --problem");
    SyntheticProblem p = SyntheticProblem::make(o.problem, parse_cost_field(o.cost_field), o.noise);
    cfg.problems.push_back(
        synthetic_problem_spec(o.problem + "-" + o.cost_field, std::move(p)));
  }
  if (cfg.problems.empty()) throw UsageError("no problem: pass --config or --problem");
  if (o.budget) cfg.method.budget = *o.budget;
  if (o.tau_init) cfg.method.tau_init = *o.tau_init;
  if (o.batch) cfg.method.batch = *o.batch;
  if (o.reps) cfg.reps = *o.reps;
  if (o.seed) cfg.seed = *o.seed;
  if (cfg.reps < 1) throw UsageError("--reps must be >= 1");
  for (auto& p : cfg.problems) {
    if (o.wall_clock) {
      if (!p.external) {
        throw UsageError("--wall-clock applies only to external problems ('" + p.name + "')");
      }
      p.external->cost_source = CostSource::kWallClock;
    } else if (o.simulated && p.external) {
      p.external->cost_source = CostSource::kReported;
    }
  }
  return cfg;
}

std::vector<Method> resolve_methods(const Options& o, const ExperimentConfig& cfg) {
  std::vector<Method> out;
  for (const auto& m : o.methods) {
    try {
      out.push_back(parse_method(m));
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
  }
  if (out.empty()) out.push_back(cfg.method.method);
  return out;
}

CostAxis parse_axis(const std::string& s) {
  if (s == "elapsed") return CostAxis::kElapsed;
  if (s == "total") return CostAxis::kTotal;
  throw UsageError("--axis must be elapsed or total");
}

std::string trace_name(std::size_t rep) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "trace_%03zu.jsonl", rep);
  return buf;
}

// Runs one method on one problem and writes its artifacts; returns the
// summary and whether every replication completed.
std::pair<Summary, bool> run_one(const ProblemSpec& problem, MethodConfig method,
                                 const ExperimentConfig& cfg, CostAxis axis,
                                 const fs::path& dir) {
  const Replication rep = replicate(
      method, problem.space, [&] { return problem.make_evaluator(); }, cfg.reps,
      cfg.seed, problem.context(), problem.optimum(), axis);
  fs::create_directories(dir);
  for (std::size_t r = 0; r < rep.traces.size(); ++r) {
    save_trace(dir / trace_name(r), rep.traces[r], problem.space);
  }
  save_summary(dir / "summary.tsv", rep.summary);
  for (const auto& f : rep.failures) std::cerr << "carbo: " << f << '\n';
  return {rep.summary, rep.failures.empty()};
}

void print_summary_line(const std::string& problem, const Summary& s) {
  std::cout << problem << '\t' << s.method << "\tcompleted=" << s.completed << '/'
            << s.requested << "\tfinal_median=" << format_number(s.final_median);
  if (s.optimum) std::cout << "\tregret=" << format_number(s.final_median - *s.optimum);
  std::cout << "\tmedian_evaluations=" << format_number(s.median_evaluations) << '\n';
}

int cmd_run(const Options& o) {
  ExperimentConfig cfg = resolve(o);
  const auto methods = resolve_methods(o, cfg);
  if (methods.size() != 1) throw UsageError("run takes exactly one --method (use compare)");
  cfg.method.method = methods.front();
  cfg.method.validate();
  const CostAxis axis = parse_axis(o.axis);
  bool ok = true;
  for (const auto& p : cfg.problems) {
    const fs::path dir = fs::path(o.out) / p.name / std::string(to_string(cfg.method.method));
    auto [summary, complete] = run_one(p, cfg.method, cfg, axis, dir);
    print_summary_line(p.name, summary);
    ok = ok && complete;
  }
  return ok ? 0 : kRuntimeError;
}

int cmd_compare(const Options& o) {
  ExperimentConfig cfg = resolve(o);
  const auto methods = resolve_methods(o, cfg);
  if (methods.size() < 2) throw UsageError("compare needs at least two --method flags");
  const CostAxis axis = parse_axis(o.axis);
  bool ok = true;
  std::vector<SavingsRow> rows;
  for (const auto& p : cfg.problems) {
    std::vector<Summary> summaries;
    for (Method m : methods) {
      MethodConfig mc = cfg.method;
      mc.method = m;
      mc.validate();
      const fs::path dir = fs::path(o.out) / p.name / std::string(to_string(m));
      auto [summary, complete] = run_one(p, mc, cfg, axis, dir);
      print_summary_line(p.name, summary);
      summaries.push_back(summary);
      ok = ok && complete;
    }
    rows.push_back(savings_row(p.name, summaries.front(),
                               std::vector<Summary>(summaries.begin() + 1, summaries.end())));
  }
  std::ostringstream table;
  write_savings_table(table, rows);
  std::ofstream(fs::path(o.out) / "savings.tsv", std::ios::binary) << table.str();
  std::cout << table.str();
  return ok ? 0 : kRuntimeError;
}

int cmd_design(const Options& o) {
  ExperimentConfig cfg = resolve(o);
  if (cfg.problems.size() != 1) throw UsageError("design takes exactly one problem");
  const ProblemSpec& p = cfg.problems.front();
  MethodConfig& mc = cfg.method;
  if (!o.budget && !o.tau_init && !mc.tau_init && !(mc.budget > 0.0)) {
    throw UsageError("design needs --tau-init or --budget");
  }
  const double tau_init = mc.resolved_tau_init();
  if (!(tau_init > 0.0)) throw UsageError("design budget must be positive");
  const RunContext ctx = p.context();
  if (mc.cost_model != CostModelKind::kWarpedGp && !ctx.features) {
    throw ConfigError("cost model needs flop features this problem does not provide");
  }
  auto evaluator = p.make_evaluator();
  DesignOptions opts;
  opts.pool_size = mc.design_pool_size;
  const Design d = build_design(p.space, make_cost_factory(mc.cost_model, ctx.features),
                                tau_init, mc.batch, *evaluator, cfg.seed, opts);
  nlohmann::json doc;
  doc["format"] = "carbo-design";
  doc["version"] = 1;
  doc["problem"] = p.describe();
  doc["tau_init"] = tau_init;
  doc["batch"] = mc.batch;
  doc["seed"] = cfg.seed;
  doc["elapsed"] = d.elapsed;
  doc["total_cost"] = d.total_cost;
  doc["fill"] = std::isfinite(d.fill) ? nlohmann::json(d.fill) : nlohmann::json(nullptr);
  doc["points"] = nlohmann::json::array();
  for (const auto& e : d.entries) {
    nlohmann::json pt;
    pt["round"] = e.round;
    pt["params"] = to_json(e.point.raw);
    pt["encoded"] = std::vector<double>(e.point.encoded.data(),
                                        e.point.encoded.data() + e.point.encoded.size());
    pt["objective"] = e.objective ? nlohmann::json(*e.objective) : nlohmann::json(nullptr);
    pt["cost"] = e.cost;
    if (!e.error.empty()) pt["error"] = e.error;
    doc["points"].push_back(pt);
  }
  fs::create_directories(o.out);
  const std::string text = doc.dump(2) + "\n";
  std::ofstream(fs::path(o.out) / "design.json", std::ios::binary) << text;
  std::cout << text;
  return 0;
}

int cmd_plot_data(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<fs::path> files;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      for (const auto& e : fs::recursive_directory_iterator(p)) {
        if (e.is_regular_file() && e.path().filename() == "summary.tsv") files.push_back(e.path());
      }
    } else if (fs::exists(p)) {
      files.push_back(p);
    } else {
      throw Error("no such file or directory: '" + in + "'");
    }
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw Error("no summary files found");
  std::vector<Summary> summaries;
  for (const auto& f : files) summaries.push_back(load_summary(f));
  std::ostringstream table;
  write_tidy(table, summaries);
  if (out.empty() || out == "-") {
    std::cout << table.str();
  } else {
    const fs::path path(out);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream(path, std::ios::binary) << table.str();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-aware Bayesian optimization under an evaluation-cost budget"};
  app.require_subcommand(1);
  Options o;

  auto* run = app.add_subcommand("run", "Run one method on each problem, with replications");
  add_common(run, o);
  run->add_option("--method", o.methods, "Method name")->take_all();
  run->add_option("--reps", o.reps, "Replications");
  run->add_option("--axis", o.axis, "Summary cost axis: elapsed or total");

  auto* compare = app.add_subcommand("compare", "Run several methods and tabulate cost savings");
  add_common(compare, o);
  compare->add_option("--method", o.methods, "Method name (repeat; the first is credited)");
  compare->add_option("--reps", o.reps, "Replications");
  compare->add_option("--axis", o.axis, "Summary cost axis: elapsed or total");

  auto* design = app.add_subcommand("design", "Build and evaluate a cost-effective initial design");
  add_common(design, o);

  std::vector<std::string> plot_inputs;
  std::string plot_out;
  auto* plot = app.add_subcommand("plot-data", "Merge summaries into one long-format table");
  plot->add_option("inputs", plot_inputs, "Summary files or directories")->required();
  plot->add_option("--out", plot_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageError;
  }

  try {
    if (*run) return cmd_run(o);
    if (*compare) return cmd_compare(o);
    if (*design) return cmd_design(o);
    if (*plot) return cmd_plot_data(plot_inputs, plot_out);
  } catch (const UsageError& e) {
    std::cerr << "carbo: " << e.what() << '\n';
    return kUsageError;
  } catch (const ConfigError& e) {
    std::cerr << "carbo: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "carbo: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}
