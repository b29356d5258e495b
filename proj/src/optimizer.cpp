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

#include "carbo/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "carbo/errors.hpp"
#include "carbo/initial_design.hpp"
#include "carbo/rng.hpp"

namespace carbo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Sub-seed streams.
enum Stream : std::uint64_t {
  kWarmStream = 1,
  kDesignStream = 2,
  kEvalStream = 3,
  kGpStream = 4,
  kCostStream = 5,
  kProposeStream = 6,
  kFallbackStream = 7,
};

struct MethodTraits {
  bool design;
  bool cooled;
  double alpha;  // when not cooled
};

MethodTraits traits(Method m) {
  switch (m) {
    case Method::kCarbo: return {true, true, 0.0};
    case Method::kEi: return {false, false, 0.0};
    case Method::kEipu: return {false, false, 1.0};
    case Method::kEiCool: return {false, true, 0.0};
    case Method::kDesignEi: return {true, false, 0.0};
    case Method::kDesignEipu: return {true, false, 1.0};
    case Method::kRandom: return {false, false, 0.0};
  }
  return {false, false, 0.0};
}

// Owns the trace under construction and the two clocks.
class RunState {
 public:
  RunState(Trace& trace, std::uint64_t seed) : trace_(trace), seed_(seed) {}

  double elapsed() const { return elapsed_; }
  std::size_t round() const { return round_; }
  const std::vector<CostSample>& cost_samples() const { return samples_; }

  std::vector<std::uint64_t> eval_seeds(std::size_t n) const {
    std::vector<std::uint64_t> s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = derive_seed(derive_seed(seed_, kEvalStream), round_, j);
    return s;
  }

  // Records one completed round. Observations are ordered by completion
  // time within the round.
  void ingest(std::span<const Point> pts, const std::vector<EvalResult>& results,
              Phase phase, std::optional<double> alpha) {
    if (results.size() != pts.size()) {
      throw EvaluatorUnavailable("evaluator returned " + std::to_string(results.size()) +
                                 " results for " + std::to_string(pts.size()) + " points");
    }
    std::vector<std::size_t> order(pts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return results[a].cost < results[b].cost;
    });
    double round_max = 0.0;
    for (std::size_t j : order) {
      const EvalResult& r = results[j];
      Observation o;
      o.point = pts[j];
      if (r.objective && std::isfinite(*r.objective)) {
        o.objective = r.objective;
      } else {
        o.error = r.error.empty() ? "non-finite objective" : r.error;
      }
      o.cost = r.cost;
      total_ += r.cost;
      o.cumulative_cost = total_;
      o.timestamp = elapsed_ + r.cost;
      o.phase = phase;
      o.round = round_;
      o.alpha = alpha;
      const double prev = trace_.best_so_far.empty() ? kInf : trace_.best_so_far.back();
      trace_.best_so_far.push_back(o.objective ? std::min(prev, *o.objective) : prev);
      trace_.observations.push_back(std::move(o));
      round_max = std::max(round_max, r.cost);
      if (r.cost > 0.0 && std::isfinite(r.cost)) samples_.push_back({pts[j].encoded, r.cost});
    }
    elapsed_ += round_max;
    ++round_;
  }

  void evaluate(Evaluator& ev, std::span<const Point> pts, Phase phase,
                std::optional<double> alpha) {
    const auto seeds = eval_seeds(pts.size());
    ingest(pts, ev.evaluate_batch(pts, seeds), phase, alpha);
  }

 private:
  Trace& trace_;
  std::uint64_t seed_;
  double elapsed_ = 0.0;
  double total_ = 0.0;
  std::size_t round_ = 0;
  std::vector<CostSample> samples_;
};

// Forwards design-phase batches to the run state so they land in the trace
// as they complete.
class RecordingEvaluator final : public Evaluator {
 public:
  RecordingEvaluator(Evaluator& inner, RunState& state)
      : inner_(inner), state_(state) {}

  std::vector<EvalResult> evaluate_batch(
      std::span<const Point> points, std::span<const std::uint64_t> seeds) override {
    auto results = inner_.evaluate_batch(points, seeds);
    state_.ingest(points, results, Phase::kInitDesign, std::nullopt);
    return results;
  }
  bool simulated() const override { return inner_.simulated(); }

 private:
  Evaluator& inner_;
  RunState& state_;
};

// Stream of uniform points; prefixes agree across calls with the same seed.
class UniformStream {
 public:
  UniformStream(const SearchSpace& space, std::uint64_t seed)
      : space_(space), seed_(seed) {}

  std::vector<Point> take(std::size_t n) {
    if (next_ + n > cache_.size()) {
      cache_ = sample_uniform(space_, std::max<std::size_t>(2 * (next_ + n), 64), seed_);
    }
    std::vector<Point> out(cache_.begin() + static_cast<std::ptrdiff_t>(next_),
                           cache_.begin() + static_cast<std::ptrdiff_t>(next_ + n));
    next_ += n;
    return out;
  }

 private:
  const SearchSpace& space_;
  std::uint64_t seed_;
  std::vector<Point> cache_;
  std::size_t next_ = 0;
};

CostSurrogateFactory cost_factory_for(const MethodConfig& config,
                                      const RunContext& context) {
  if (config.cost_model != CostModelKind::kWarpedGp && !context.features) {
    throw ConfigError("cost model '" + std::string(to_string(config.cost_model)) +
                      "' needs flop features, which this problem does not provide");
  }
  return make_cost_factory(config.cost_model, context.features, context.architecture);
}

void run_loop(const MethodConfig& config, const SearchSpace& space,
              Evaluator& evaluator, std::uint64_t seed,
              const RunContext& context, Trace& trace) {
  RunState state(trace, seed);
  const double tau = config.budget;
  const std::size_t b = config.batch;
  UniformStream uniform(space, derive_seed(seed, kWarmStream));

  // Cost warm start (and the whole run for random search).
  if (config.method == Method::kRandom) {
    std::size_t done = 0;
    while (state.elapsed() < tau) {
      const auto pts = uniform.take(b);
      state.evaluate(evaluator, pts,
                     done < config.warm_start ? Phase::kCostWarmup : Phase::kOptimize,
                     std::nullopt);
      done += pts.size();
    }
    return;
  }
  std::size_t warm_left = config.warm_start;
  while (warm_left > 0 && state.elapsed() < tau) {
    const auto pts = uniform.take(std::min(b, warm_left));
    state.evaluate(evaluator, pts, Phase::kCostWarmup, std::nullopt);
    warm_left -= pts.size();
  }

  const MethodTraits t = traits(config.method);
  const CostSurrogateFactory factory = cost_factory_for(config, context);

  if (config.resolved_use_design() && state.elapsed() < tau) {
    const double design_budget = std::min(config.resolved_tau_init(), tau - state.elapsed());
    RecordingEvaluator recorder(evaluator, state);
    DesignOptions opts;
    opts.pool_size = config.design_pool_size;
    opts.prior_costs = state.cost_samples();
    build_design(space, factory, design_budget, b, recorder,
                 derive_seed(seed, kDesignStream), opts);
  }

  const double init = state.elapsed();
  std::optional<KernelParams> previous;
  while (state.elapsed() < tau) {
    const std::size_t round = state.round();
    double alpha = t.alpha;
    if (config.alpha_override) {
      alpha = *config.alpha_override;
    } else if (t.cooled) {
      alpha = cooling_alpha({tau, init, state.elapsed()});
    }

    std::vector<Eigen::Index> ok;
    for (std::size_t i = 0; i < trace.observations.size(); ++i) {
      if (trace.observations[i].objective) ok.push_back(static_cast<Eigen::Index>(i));
    }
    std::optional<GpSurrogate> gp;
    if (ok.size() >= 2) {
      Eigen::MatrixXd x(static_cast<Eigen::Index>(ok.size()),
                        static_cast<Eigen::Index>(space.encoded_dim()));
      Eigen::VectorXd y(x.rows());
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const Observation& o = trace.observations[static_cast<std::size_t>(ok[static_cast<std::size_t>(r)])];
        x.row(r) = o.point.encoded.transpose();
        y[r] = *o.objective;
      }
      GpFitOptions fit;
      fit.restarts = config.gp_restarts;
      fit.seed = derive_seed(seed, kGpStream, round);
      fit.initial = previous;
      try {
        gp = GpSurrogate::fit(x, y, {}, fit);
        previous = gp->params();
      } catch (const NumericalError& e) {
        log_warning(std::string("surrogate fit failed, proposing at random: ") + e.what());
      }
    }

    std::vector<Point> pts;
    if (gp) {
      std::shared_ptr<const CostModel> cost =
          alpha == 0.0 ? std::make_shared<ConstantCost>(1.0)
                       : factory(state.cost_samples(), derive_seed(seed, kCostStream, round));
      BatchOptions bopts;
      bopts.n_fantasies = config.n_fantasies;
      bopts.maximizer = config.maximizer;
      pts = propose_batch(*gp, *cost, alpha, b, space,
                          derive_seed(seed, kProposeStream, round), bopts)
                .points;
    } else {
      pts = sample_uniform(space, b, derive_seed(seed, kFallbackStream, round));
    }
    state.evaluate(evaluator, pts, Phase::kOptimize, alpha);
  }
}

double interpolate_step(const std::vector<double>& grid, const std::vector<double>& values,
                        double c) {
  // Right-continuous step function through (grid, values).
  auto it = std::upper_bound(grid.begin(), grid.end(), c);
  if (it == grid.begin()) return values.front();
  return values[static_cast<std::size_t>(it - grid.begin()) - 1];
}

std::optional<double> first_reach(const std::vector<double>& grid,
                                  const std::vector<double>& values, double target) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (values[i] <= target) return grid[i];
  }
  return std::nullopt;
}

}  // namespace

std::string_view to_string(Method method) {
  switch (method) {
    case Method::kCarbo: return "carbo";
    case Method::kEi: return "ei";
    case Method::kEipu: return "eipu";
    case Method::kEiCool: return "ei-cool";
    case Method::kDesignEi: return "design-ei";
    case Method::kDesignEipu: return "design-eipu";
    case Method::kRandom: return "random";
  }
  return "carbo";
}

std::vector<std::string> method_names() {
  return {"carbo", "ei", "eipu", "ei-cool", "design-ei", "design-eipu", "random"};
}

Method parse_method(std::string_view text) {
  for (Method m : {Method::kCarbo, Method::kEi, Method::kEipu, Method::kEiCool,
                   Method::kDesignEi, Method::kDesignEipu, Method::kRandom}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown method '" + std::string(text) + "'");
}

std::string_view to_string(Phase phase) {
  switch (phase) {
    case Phase::kCostWarmup: return "cost-warmup";
    case Phase::kInitDesign: return "init-design";
    case Phase::kOptimize: return "optimize";
  }
  return "optimize";
}

Phase parse_phase(std::string_view text) {
  if (text == "cost-warmup") return Phase::kCostWarmup;
  if (text == "init-design") return Phase::kInitDesign;
  if (text == "optimize") return Phase::kOptimize;
  throw SchemaError("unknown phase '" + std::string(text) + "'");
}

double MethodConfig::resolved_tau_init() const {
  return tau_init ? *tau_init : budget / 8.0;
}

bool MethodConfig::resolved_use_design() const {
  if (method == Method::kRandom) return false;
  return use_design ? *use_design : traits(method).design;
}

void MethodConfig::validate() const {
  if (!(budget > 0.0) || !std::isfinite(budget)) {
    throw ConfigError("budget must be a positive finite number");
  }
  if (batch < 1) throw ConfigError("batch must be >= 1");
  if (n_fantasies < 1) throw ConfigError("n_fantasies must be >= 1");
  if (gp_restarts < 1) throw ConfigError("gp_restarts must be >= 1");
  if (resolved_use_design()) {
    const double ti = resolved_tau_init();
    if (!(ti > 0.0 && ti < budget)) {
      throw ConfigError("tau_init must satisfy 0 < tau_init < budget");
    }
  }
  if (alpha_override && !(*alpha_override >= 0.0 && *alpha_override <= 1.0)) {
    throw ConfigError("alpha override must lie in [0, 1]");
  }
}

nlohmann::json to_json(const MethodConfig& c) {
  nlohmann::json j;
  j["method"] = to_string(c.method);
  j["budget"] = c.budget;
  j["tau_init"] = c.resolved_tau_init();
  j["batch"] = c.batch;
  j["n_fantasies"] = c.n_fantasies;
  j["warm_start"] = c.warm_start;
  j["design_pool_size"] = c.design_pool_size;
  j["cost_model"] = to_string(c.cost_model);
  j["gp_restarts"] = c.gp_restarts;
  j["use_design"] = c.resolved_use_design();
  if (c.alpha_override) j["alpha_override"] = *c.alpha_override;
  return j;
}

std::optional<std::size_t> Trace::best_index() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    if (o.objective && (!best || *o.objective < *observations[*best].objective)) best = i;
  }
  return best;
}

double Trace::final_best() const {
  return best_so_far.empty() ? kInf : best_so_far.back();
}

double Trace::total_cost() const {
  return observations.empty() ? 0.0 : observations.back().cumulative_cost;
}

double Trace::elapsed() const {
  double e = 0.0;
  for (const auto& o : observations) e = std::max(e, o.timestamp);
  return e;
}

Trace run(const MethodConfig& config, const SearchSpace& space,
          Evaluator& evaluator, std::uint64_t seed, const RunContext& context) {
  config.validate();
  Trace trace;
  trace.method = std::string(to_string(config.method));
  trace.seed = seed;
  trace.simulated = evaluator.simulated();
  trace.config = {{"method", to_json(config)}, {"problem", context.problem}};
  try {
    run_loop(config, space, evaluator, seed, context, trace);
  } catch (const EvaluatorUnavailable& e) {
    trace.completed = false;
    trace.abort_reason = e.what();
  }
  return trace;
}

double best_at(const Trace& trace, double c, CostAxis axis) {
  double best = kInf;
  for (std::size_t i = 0; i < trace.observations.size(); ++i) {
    const auto& o = trace.observations[i];
    const double t = axis == CostAxis::kElapsed ? o.timestamp : o.cumulative_cost;
    if (t > c) break;
    best = trace.best_so_far[i];
  }
  return best;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  const double lo = v[n / 2 - 1];
  const double hi = v[n / 2];
  if (std::isinf(lo) || std::isinf(hi)) return lo == hi ? lo : (std::isinf(hi) ? hi : lo);
  return 0.5 * (lo + hi);
}

double sample_stdev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  for (double x : v) {
    if (!std::isfinite(x)) return kInf;
  }
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Summary summarize(const std::vector<Trace>& traces, double budget,
                  std::optional<double> optimum, CostAxis axis,
                  std::size_t grid_points) {
  if (grid_points < 2) throw ArgumentError("summarize: need at least 2 grid points");
  Summary s;
  s.budget = budget;
  s.axis = axis;
  s.optimum = optimum;
  s.requested = traces.size();
  std::vector<const Trace*> done;
  for (const auto& t : traces) {
    if (t.completed) done.push_back(&t);
  }
  s.completed = done.size();
  if (!traces.empty()) s.method = traces.front().method;
  s.grid.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    s.grid[i] = budget * static_cast<double>(i) / static_cast<double>(grid_points - 1);
  }
  s.median.assign(grid_points, kInf);
  s.stdev.assign(grid_points, 0.0);
  if (done.empty()) {
    s.final_median = kInf;
    return s;
  }
  std::vector<double> vals(done.size());
  for (std::size_t i = 0; i < grid_points; ++i) {
    for (std::size_t r = 0; r < done.size(); ++r) vals[r] = best_at(*done[r], s.grid[i], axis);
    s.median[i] = median(vals);
    s.stdev[i] = sample_stdev(vals);
  }
  std::vector<double> finals, counts;
  for (const Trace* t : done) {
    finals.push_back(t->final_best());
    counts.push_back(static_cast<double>(t->observations.size()));
  }
  s.final_median = median(finals);
  s.final_stdev = sample_stdev(finals);
  s.median_evaluations = median(counts);
  return s;
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t rep) {
  return derive_seed(master_seed, rep);
}

Replication replicate(const MethodConfig& config, const SearchSpace& space,
                      const EvaluatorFactory& make_evaluator,
                      std::size_t n_reps, std::uint64_t master_seed,
                      const RunContext& context, std::optional<double> optimum,
                      CostAxis axis) {
  if (n_reps < 1) throw ArgumentError("replicate: n_reps must be >= 1");
  config.validate();
  Replication out;
  for (std::size_t r = 0; r < n_reps; ++r) {
    const std::uint64_t seed = replication_seed(master_seed, r);
    try {
      auto evaluator = make_evaluator();
      Trace t = run(config, space, *evaluator, seed, context);
      if (!t.completed) {
        out.failures.push_back("replication " + std::to_string(r) + ": " + t.abort_reason);
      }
      out.traces.push_back(std::move(t));
    } catch (const Error& e) {
      out.failures.push_back("replication " + std::to_string(r) + ": " + e.what());
      Trace t;
      t.method = std::string(to_string(config.method));
      t.seed = seed;
      t.completed = false;
      t.abort_reason = e.what();
      out.traces.push_back(std::move(t));
    }
  }
  out.summary = summarize(out.traces, config.budget, optimum, axis);
  out.summary.method = std::string(to_string(config.method));
  out.summary.requested = n_reps;
  return out;
}

double cost_savings(const Summary& a, const Summary& b) {
  if (a.grid.empty() || b.grid.empty()) throw ArgumentError("cost_savings: empty summary");
  std::vector<double> grid = a.grid;
  std::vector<double> ma = a.median;
  std::vector<double> mb = b.median;
  if (a.grid != b.grid) {
    const bool a_finer = a.grid.size() >= b.grid.size();
    grid = a_finer ? a.grid : b.grid;
    const Summary& coarse = a_finer ? b : a;
    std::vector<double> resampled(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      resampled[i] = interpolate_step(coarse.grid, coarse.median, grid[i]);
    }
    ma = a_finer ? a.median : resampled;
    mb = a_finer ? resampled : b.median;
  }
  const double span = grid.back() - grid.front();
  if (!(span > 0.0)) throw ArgumentError("cost_savings: degenerate cost grid");

  const double b_final = mb.back();
  if (auto ca = first_reach(grid, ma, b_final)) {
    const double cb = *first_reach(grid, mb, b_final);
    return (cb - *ca) / span * 100.0;
  }
  const auto cb = first_reach(grid, mb, ma.back());
  return -(grid.back() - cb.value_or(grid.back())) / span * 100.0;
}

}  // namespace carbo
