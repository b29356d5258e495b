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

#include "carbo/cost_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "carbo/errors.hpp"
#include "carbo/search_space.hpp"

namespace carbo {

ConstantCost::ConstantCost(double value, double floor)
    : value_(std::max(value, floor)) {}

WarpedGpCost::WarpedGpCost(GpSurrogate log_gp, double cost_floor)
    : log_gp_(std::move(log_gp)), cost_floor_(cost_floor) {}

double WarpedGpCost::predict(std::span<const double> encoded) const {
  return std::max(std::exp(log_gp_.predict(encoded).mean), cost_floor_);
}

namespace {

Eigen::MatrixXd stack_points(std::span<const CostSample> obs) {
  const auto d = obs.front().encoded.size();
  Eigen::MatrixXd x(static_cast<Eigen::Index>(obs.size()), d);
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (obs[i].encoded.size() != d) throw DataError("cost samples have mixed dimensions");
    x.row(static_cast<Eigen::Index>(i)) = obs[i].encoded.transpose();
  }
  return x;
}

Eigen::VectorXd log_costs(std::span<const CostSample> obs) {
  Eigen::VectorXd y(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!(obs[i].cost > 0.0) || !std::isfinite(obs[i].cost)) {
      throw DataError("cost observations must be positive and finite");
    }
    y[static_cast<Eigen::Index>(i)] = std::log(obs[i].cost);
  }
  return y;
}

double median(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  const double upper = v[n / 2];
  if (n % 2 == 1) return upper;
  const double lower = *std::max_element(v.begin(), v.begin() + n / 2);
  return 0.5 * (lower + upper);
}

double median_absolute_deviation(const Eigen::VectorXd& r) {
  std::vector<double> v(r.data(), r.data() + r.size());
  const double m = median(v);
  for (double& x : v) x = std::abs(x - m);
  return median(std::move(v));
}

std::string column_label(std::span<const std::string> names, Eigen::Index j) {
  if (static_cast<std::size_t>(j) < names.size()) return names[static_cast<std::size_t>(j)];
  return "column " + std::to_string(j);
}

// Weighted least squares; rows scaled by sqrt(w).
Eigen::VectorXd solve_weighted(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& w,
                               std::span<const std::string> names) {
  const Eigen::Index cols = a.cols();
  Eigen::VectorXd norms(cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    norms[j] = a.col(j).cwiseAbs().maxCoeff();
    if (norms[j] == 0.0) {
      throw NumericalError("rank-deficient feature matrix: column '" +
                           column_label(names, j) + "' is identically zero");
    }
  }
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd as = sw.asDiagonal() * a * norms.cwiseInverse().asDiagonal();
  const Eigen::VectorXd ys = sw.cwiseProduct(y);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(as);
  qr.setThreshold(1e-10);
  if (qr.rank() < cols) {
    std::string cols_named;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < cols; ++k) {
      if (!cols_named.empty()) cols_named += ", ";
      cols_named += "'" + column_label(names, perm[k]) + "'";
    }
    throw NumericalError("rank-deficient feature matrix: collinear column(s) " +
                         cols_named);
  }
  return qr.solve(ys).cwiseQuotient(norms);
}

}  // namespace

WarpedGpCost fit_warped_gp(std::span<const CostSample> observations,
                           const GpFitOptions& options, double cost_floor) {
  if (observations.empty()) throw DataError("warped GP needs at least one cost observation");
  const Eigen::VectorXd y = log_costs(observations);
  return WarpedGpCost(GpSurrogate::fit(stack_points(observations), y, {}, options),
                      cost_floor);
}

// ---------------------------------------------------------------------------

FlopFeatures mlp_features(std::span<const std::int64_t> layer_sizes) {
  if (layer_sizes.empty()) throw DomainError("mlp_features: need at least one layer");
  FlopFeatures f;
  for (std::size_t i = 0; i < layer_sizes.size(); ++i) {
    if (layer_sizes[i] <= 0) {
      throw DomainError("mlp_features: layer " + std::to_string(i) +
                        " has nonpositive size");
    }
    f.linear += static_cast<double>(layer_sizes[i]);
    if (i + 1 < layer_sizes.size()) {
      f.quad += static_cast<double>(layer_sizes[i]) *
                static_cast<double>(layer_sizes[i + 1]);
    }
  }
  return f;
}

namespace {

void validate(const CnnShape& s) {
  if (s.channels.empty() || s.channels.size() != s.pool_ratios.size()) {
    throw SchemaError("cnn_features: channels and pool_ratios must have the same nonzero length");
  }
  if (s.kernel <= 0 || s.input_size <= 0 || s.color_channels <= 0) {
    throw DomainError("cnn_features: kernel, input size and color channels must be positive");
  }
  for (auto m : s.channels) {
    if (m <= 0) throw DomainError("cnn_features: channel counts must be positive");
  }
  for (double p : s.pool_ratios) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("cnn_features: pool ratios must lie in (0, 1]");
  }
  for (auto n : s.mlp_tail) {
    if (n <= 0) throw DomainError("cnn_features: tail layer sizes must be positive");
  }
}

}  // namespace

double cnn_tail_input_size(const CnnShape& s) {
  validate(s);
  const double i2 = static_cast<double>(s.input_size) * static_cast<double>(s.input_size);
  return i2 * s.pool_ratios.back() * static_cast<double>(s.channels.back());
}

FlopFeatures cnn_features(const CnnShape& s) {
  validate(s);
  const double i2 = static_cast<double>(s.input_size) * static_cast<double>(s.input_size);
  const double r2 = static_cast<double>(s.kernel) * static_cast<double>(s.kernel);
  const std::size_t k = s.channels.size();
  auto m = [&](std::size_t i) { return static_cast<double>(s.channels[i]); };

  FlopFeatures f;
  f.conv = i2 * r2 * static_cast<double>(s.color_channels) * m(0);
  for (std::size_t i = 0; i + 1 < k; ++i) f.conv += i2 * r2 * m(i) * m(i + 1);
  for (std::size_t i = 0; i < k; ++i) f.pool += i2 * s.pool_ratios[i] * m(i);

  // Dense tail: input layer I^2 p_k m_k followed by mlp_tail.
  double prev = cnn_tail_input_size(s);
  f.linear = prev;
  for (auto n : s.mlp_tail) {
    const double nd = static_cast<double>(n);
    f.quad += prev * nd;
    f.linear += nd;
    prev = nd;
  }
  return f;
}

std::string_view to_string(Architecture arch) {
  return arch == Architecture::kMlp ? "mlp" : "cnn";
}

Architecture parse_architecture(std::string_view text) {
  if (text == "mlp") return Architecture::kMlp;
  if (text == "cnn") return Architecture::kCnn;
  throw SchemaError("unknown architecture '" + std::string(text) + "'");
}

std::vector<std::string> feature_columns(Architecture arch) {
  if (arch == Architecture::kMlp) return {"quad", "linear", "intercept"};
  return {"conv", "pool", "quad", "linear", "intercept"};
}

Eigen::MatrixXd design_matrix(std::span<const FlopFeatures> features,
                              Architecture arch) {
  const Eigen::Index n = static_cast<Eigen::Index>(features.size());
  const bool cnn = arch == Architecture::kCnn;
  Eigen::MatrixXd a(n, cnn ? 5 : 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    const FlopFeatures& f = features[static_cast<std::size_t>(i)];
    if (cnn) {
      a.row(i) << f.conv, f.pool, f.quad, f.linear, 1.0;
    } else {
      a.row(i) << f.quad, f.linear, 1.0;
    }
  }
  return a;
}

double FlopCostModel::raw_predict(const FlopFeatures& f) const {
  return coeffs[0] * f.conv + coeffs[1] * f.pool + coeffs[2] * f.quad +
         coeffs[3] * f.linear + coeffs[4];
}

double FlopCostModel::predict(const FlopFeatures& f) const {
  const double raw = raw_predict(f);
  return std::isfinite(raw) ? std::max(raw, cost_floor) : cost_floor;
}

// ---------------------------------------------------------------------------

RegressionResult least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                               std::span<const std::string> column_names) {
  if (a.rows() != y.size()) throw SchemaError("least_squares: row count mismatch");
  if (a.rows() < a.cols()) {
    throw NumericalError("least_squares: fewer rows than columns");
  }
  RegressionResult res;
  res.coeffs = solve_weighted(a, y, Eigen::VectorXd::Ones(a.rows()), column_names);
  res.iterations = 1;
  return res;
}

RegressionResult huber_regression(const Eigen::MatrixXd& a,
                                  const Eigen::VectorXd& y,
                                  const HuberOptions& options,
                                  std::span<const std::string> column_names) {
  RegressionResult res = least_squares(a, y, column_names);
  const double y_scale = y.cwiseAbs().maxCoeff();
  const double delta_floor = std::max(1e-12 * y_scale, 1e-300);

  auto robust_delta = [&](const Eigen::VectorXd& c) {
    return std::max(1.35 * median_absolute_deviation(y - a * c), delta_floor);
  };

  auto irls = [&](Eigen::VectorXd c, double delta, int& iterations) {
    for (int it = 0; it < options.max_iterations; ++it) {
      ++iterations;
      const Eigen::VectorXd r = y - a * c;
      Eigen::VectorXd w(r.size());
      for (Eigen::Index i = 0; i < r.size(); ++i) {
        const double ar = std::abs(r[i]);
        w[i] = ar <= delta ? 1.0 : delta / ar;
      }
      const Eigen::VectorXd next = solve_weighted(a, y, w, column_names);
      const double change = (next - c).lpNorm<Eigen::Infinity>();
      const double size = std::max(next.lpNorm<Eigen::Infinity>(), 1e-300);
      c = next;
      if (change <= options.tolerance * size) break;
    }
    return c;
  };

  int iterations = 0;
  if (options.delta) {
    if (!(*options.delta > 0.0)) throw ArgumentError("Huber delta must be positive");
    res.delta = *options.delta;
    res.coeffs = irls(res.coeffs, res.delta, iterations);
  } else {
    res.delta = robust_delta(res.coeffs);
    res.coeffs = irls(res.coeffs, res.delta, iterations);
    res.delta = robust_delta(res.coeffs);
    res.coeffs = irls(res.coeffs, res.delta, iterations);
  }
  res.iterations = iterations;
  return res;
}

FlopCostModel fit_huber(std::span<const FlopFeatures> features,
                        const Eigen::VectorXd& costs, Architecture arch,
                        const HuberOptions& options,
                        const ArchitectureConstants& constants) {
  if (static_cast<Eigen::Index>(features.size()) != costs.size()) {
    throw SchemaError("fit_huber: feature and cost counts differ");
  }
  for (Eigen::Index i = 0; i < costs.size(); ++i) {
    if (!(costs[i] > 0.0) || !std::isfinite(costs[i])) {
      throw DataError("fit_huber: costs must be positive and finite");
    }
  }
  const auto names = feature_columns(arch);
  const Eigen::MatrixXd a = design_matrix(features, arch);
  if (a.rows() < a.cols()) {
    throw NumericalError("fit_huber: need at least " + std::to_string(a.cols()) +
                         " samples");
  }
  const RegressionResult fit = huber_regression(a, costs, options, names);

  FlopCostModel model;
  model.architecture = arch;
  model.constants = constants;
  model.huber_delta = fit.delta;
  if (arch == Architecture::kCnn) {
    model.coeffs = fit.coeffs;
  } else {
    model.coeffs << 0.0, 0.0, fit.coeffs[0], fit.coeffs[1], fit.coeffs[2];
  }
  return model;
}

nlohmann::json to_json(const FlopCostModel& m) {
  return nlohmann::json{
      {"format", "carbo-flop-cost-model"},
      {"version", 1},
      {"architecture", to_string(m.architecture)},
      {"coefficients",
       {{"conv", m.coeffs[0]},
        {"pool", m.coeffs[1]},
        {"quad", m.coeffs[2]},
        {"linear", m.coeffs[3]},
        {"intercept", m.coeffs[4]}}},
      {"huber_delta", m.huber_delta},
      {"cost_floor", m.cost_floor},
      {"constants",
       {{"batch_size", m.constants.batch_size},
        {"epochs", m.constants.epochs},
        {"input_size", m.constants.input_size},
        {"color_channels", m.constants.color_channels},
        {"kernel_size", m.constants.kernel_size}}}};
}

FlopCostModel flop_cost_model_from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "carbo-flop-cost-model") {
      throw SchemaError("not a flop cost model document");
    }
    if (doc.at("version").get<int>() != 1) {
      throw SchemaError("unsupported flop cost model version");
    }
    FlopCostModel m;
    m.architecture = parse_architecture(doc.at("architecture").get<std::string>());
    const auto& c = doc.at("coefficients");
    m.coeffs << c.at("conv").get<double>(), c.at("pool").get<double>(),
        c.at("quad").get<double>(), c.at("linear").get<double>(),
        c.at("intercept").get<double>();
    m.huber_delta = doc.at("huber_delta").get<double>();
    m.cost_floor = doc.value("cost_floor", kDefaultCostFloor);
    const auto& k = doc.at("constants");
    m.constants.batch_size = k.at("batch_size").get<std::int64_t>();
    m.constants.epochs = k.at("epochs").get<std::int64_t>();
    m.constants.input_size = k.at("input_size").get<std::int64_t>();
    m.constants.color_channels = k.at("color_channels").get<std::int64_t>();
    m.constants.kernel_size = k.at("kernel_size").get<std::int64_t>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("flop cost model: ") + e.what());
  }
}

void save_flop_cost_model(const FlopCostModel& model,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << to_json(model).dump(2) << '\n';
}

FlopCostModel load_flop_cost_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return flop_cost_model_from_json(doc);
}

// ---------------------------------------------------------------------------

FlopCost::FlopCost(FlopCostModel model, FeatureMap features)
    : model_(std::move(model)), features_(std::move(features)) {
  if (!features_) throw ArgumentError("FlopCost needs a feature map");
}

double FlopCost::predict(std::span<const double> encoded) const {
  return model_.predict(features_(encoded));
}

HybridCost::HybridCost(FlopCostModel linear, FeatureMap features,
                       std::optional<GpSurrogate> residual_gp)
    : linear_(std::move(linear)),
      features_(std::move(features)),
      residual_gp_(std::move(residual_gp)) {
  if (!features_) throw ArgumentError("HybridCost needs a feature map");
}

double HybridCost::predict(std::span<const double> encoded) const {
  if (!residual_gp_) return linear_.predict(features_(encoded));
  return std::max(std::exp(residual_gp_->predict(encoded).mean), linear_.cost_floor);
}

HybridCost fit_hybrid(const FlopCostModel& linear, FeatureMap features,
                      std::span<const CostSample> observations,
                      const GpFitOptions& options) {
  if (observations.empty()) return HybridCost(linear, std::move(features), std::nullopt);
  const Eigen::VectorXd y = log_costs(observations);
  const FlopCostModel model = linear;
  const FeatureMap fm = features;
  MeanFunction mean = [model, fm](std::span<const double> p) {
    return std::log(model.predict(fm(p)));
  };
  auto gp = GpSurrogate::fit(stack_points(observations), y, std::move(mean), options);
  return HybridCost(linear, std::move(features), std::move(gp));
}

// ---------------------------------------------------------------------------

std::string_view to_string(CostModelKind kind) {
  switch (kind) {
    case CostModelKind::kWarpedGp: return "warped-gp";
    case CostModelKind::kFlopLinear: return "flop-linear";
    case CostModelKind::kHybrid: return "hybrid";
  }
  return "unknown";
}

CostModelKind parse_cost_model_kind(std::string_view text) {
  if (text == "warped-gp") return CostModelKind::kWarpedGp;
  if (text == "flop-linear") return CostModelKind::kFlopLinear;
  if (text == "hybrid") return CostModelKind::kHybrid;
  throw ConfigError("unknown cost model '" + std::string(text) + "'");
}

namespace {

double geometric_mean_cost(std::span<const CostSample> obs) {
  double s = 0.0;
  for (const auto& o : obs) s += std::log(o.cost);
  return std::exp(s / static_cast<double>(obs.size()));
}

std::optional<FlopCostModel> try_fit_linear(std::span<const CostSample> obs,
                                            const FeatureMap& features,
                                            Architecture arch, double floor) {
  std::vector<FlopFeatures> feats;
  Eigen::VectorXd costs(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) {
    feats.push_back(features(as_span(obs[i].encoded)));
    costs[static_cast<Eigen::Index>(i)] = obs[i].cost;
  }
  if (feats.size() < feature_columns(arch).size()) return std::nullopt;
  try {
    FlopCostModel m = fit_huber(feats, costs, arch);
    m.cost_floor = floor;
    return m;
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

}  // namespace

CostSurrogateFactory make_cost_factory(CostModelKind kind, FeatureMap features,
                                       Architecture arch, double cost_floor) {
  if (kind != CostModelKind::kWarpedGp && !features) {
    throw ConfigError(std::string("cost model '") + std::string(to_string(kind)) +
                      "' needs a problem with flop features");
  }
  return [kind, features, arch, cost_floor](
             std::span<const CostSample> obs,
             std::uint64_t seed) -> std::shared_ptr<const CostModel> {
    if (obs.empty()) return std::make_shared<ConstantCost>(1.0, cost_floor);
    GpFitOptions opts;
    opts.seed = seed;
    switch (kind) {
      case CostModelKind::kWarpedGp:
        return std::make_shared<WarpedGpCost>(fit_warped_gp(obs, opts, cost_floor));
      case CostModelKind::kFlopLinear: {
        auto m = try_fit_linear(obs, features, arch, cost_floor);
        if (!m) return std::make_shared<ConstantCost>(geometric_mean_cost(obs), cost_floor);
        return std::make_shared<FlopCost>(*m, features);
      }
      case CostModelKind::kHybrid: {
        auto m = try_fit_linear(obs, features, arch, cost_floor);
        if (!m) return std::make_shared<WarpedGpCost>(fit_warped_gp(obs, opts, cost_floor));
        return std::make_shared<HybridCost>(fit_hybrid(*m, features, obs, opts));
      }
    }
    return std::make_shared<ConstantCost>(1.0, cost_floor);
  };
}

}  // namespace carbo
