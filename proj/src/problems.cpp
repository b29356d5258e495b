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

#include "carbo/problems.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "carbo/errors.hpp"
#include "carbo/rng.hpp"
#include "carbo/simd/distance.hpp"

namespace carbo {

namespace {

constexpr double kPi = std::numbers::pi;

constexpr std::array<double, 4> kHartmannAlpha{1.0, 1.2, 3.0, 3.2};

constexpr double kHartmann3A[4][3] = {
    {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}, {3.0, 10.0, 30.0}, {0.1, 10.0, 35.0}};
constexpr double kHartmann3P[4][3] = {{0.3689, 0.1170, 0.2673},
                                      {0.4699, 0.4387, 0.7470},
                                      {0.1091, 0.8732, 0.5547},
                                      {0.0381, 0.5743, 0.8828}};

constexpr double kHartmann6A[4][6] = {{10.0, 3.0, 17.0, 3.5, 1.7, 8.0},
                                      {0.05, 10.0, 17.0, 0.1, 8.0, 14.0},
                                      {3.0, 3.5, 1.7, 10.0, 17.0, 8.0},
                                      {17.0, 8.0, 0.05, 10.0, 0.1, 14.0}};
constexpr double kHartmann6P[4][6] = {
    {0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
    {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
    {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
    {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};

template <std::size_t D>
double hartmann(std::span<const double> x, const double (&a)[4][D],
                const double (&p)[4][D]) {
  if (x.size() != D) throw SchemaError("hartmann: wrong dimension");
  double sum = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < D; ++j) {
      const double diff = x[j] - p[i][j];
      inner += a[i][j] * diff * diff;
    }
    sum += kHartmannAlpha[i] * std::exp(-inner);
  }
  return -sum;
}

// Branin minimizers in raw coordinates.
constexpr double kBraninMin[3][2] = {
    {-kPi, 12.275}, {kPi, 2.275}, {3.0 * kPi, 2.475}};

constexpr std::int64_t kMlpInput = 784;
constexpr std::int64_t kMlpOutput = 10;
constexpr std::int64_t kMlpMinWidth = 16;
constexpr std::int64_t kMlpMaxWidth = 1024;

double mlp_flops_raw(const FlopFeatures& f) { return f.quad + 5.0 * f.linear; }

FlopFeatures mlp_sim_features(const SearchSpace& space,
                              std::span<const double> encoded) {
  const RawParams raw = space.decode(encoded);
  const std::array<std::int64_t, 4> layers{
      kMlpInput, std::get<std::int64_t>(raw.at("h1")),
      std::get<std::int64_t>(raw.at("h2")), kMlpOutput};
  return mlp_features(layers);
}

}  // namespace

double branin(double x1, double x2) {
  constexpr double b = 5.1 / (4.0 * kPi * kPi);
  constexpr double c = 5.0 / kPi;
  constexpr double t = 1.0 / (8.0 * kPi);
  const double u = x2 - b * x1 * x1 + c * x1 - 6.0;
  return u * u + 10.0 * (1.0 - t) * std::cos(x1) + 10.0;
}

double hartmann3(std::span<const double> x) {
  return hartmann(x, kHartmann3A, kHartmann3P);
}

double hartmann6(std::span<const double> x) {
  return hartmann(x, kHartmann6A, kHartmann6P);
}

double rastrigin(std::span<const double> x) {
  double s = 10.0 * static_cast<double>(x.size());
  for (double v : x) s += v * v - 10.0 * std::cos(2.0 * kPi * v);
  return s;
}

std::string_view to_string(CostField field) {
  switch (field) {
    case CostField::kConstant: return "constant";
    case CostField::kCheapOptimum: return "cheap-optimum";
    case CostField::kExpensiveOptimum: return "expensive-optimum";
    case CostField::kFlops: return "flops";
  }
  return "constant";
}

CostField parse_cost_field(std::string_view text) {
  if (text == "constant") return CostField::kConstant;
  if (text == "cheap-optimum") return CostField::kCheapOptimum;
  if (text == "expensive-optimum") return CostField::kExpensiveOptimum;
  if (text == "flops") return CostField::kFlops;
  throw ConfigError("unknown cost field '" + std::string(text) +
                    "' (expected constant, cheap-optimum, expensive-optimum or flops)");
}

std::vector<std::string> synthetic_objective_names() {
  return {"branin", "hartmann3", "hartmann6", "rastrigin-2d", "mlp-sim"};
}

SyntheticProblem SyntheticProblem::make(std::string_view objective,
                                        CostField field, double noise_std) {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw ConfigError("noise_std must be a finite value >= 0");
  }
  SyntheticProblem p;
  p.name_ = std::string(objective);
  p.field_ = field;
  p.noise_std_ = noise_std;

  std::vector<Eigen::VectorXd> mins;
  if (objective == "branin") {
    p.space_ = SearchSpace({Dimension::continuous("x1", -5.0, 10.0),
                            Dimension::continuous("x2", 0.0, 15.0)});
    p.objective_ = [](std::span<const double> e) {
      return branin(-5.0 + 15.0 * e[0], 15.0 * e[1]);
    };
    for (const auto& m : kBraninMin) {
      mins.push_back(Eigen::Vector2d((m[0] + 5.0) / 15.0, m[1] / 15.0));
    }
  } else if (objective == "hartmann3") {
    std::vector<Dimension> dims;
    for (int i = 1; i <= 3; ++i) dims.push_back(Dimension::continuous("x" + std::to_string(i), 0.0, 1.0));
    p.space_ = SearchSpace(std::move(dims));
    p.objective_ = [](std::span<const double> e) { return hartmann3(e); };
    mins.push_back(Eigen::Vector3d(0.114614, 0.555649, 0.852547));
  } else if (objective == "hartmann6") {
    std::vector<Dimension> dims;
    for (int i = 1; i <= 6; ++i) dims.push_back(Dimension::continuous("x" + std::to_string(i), 0.0, 1.0));
    p.space_ = SearchSpace(std::move(dims));
    p.objective_ = [](std::span<const double> e) { return hartmann6(e); };
    Eigen::VectorXd m(6);
    m << 0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573;
    mins.push_back(m);
  } else if (objective == "rastrigin-2d") {
    p.space_ = SearchSpace({Dimension::continuous("x1", -5.12, 5.12),
                            Dimension::continuous("x2", -5.12, 5.12)});
    p.objective_ = [](std::span<const double> e) {
      const std::array<double, 2> x{-5.12 + 10.24 * e[0], -5.12 + 10.24 * e[1]};
      return rastrigin(x);
    };
    mins.push_back(Eigen::Vector2d(0.5, 0.5));
  } else if (objective == "mlp-sim") {
    // Branin over (learning-rate coordinate, mean width coordinate).
    p.space_ = SearchSpace({Dimension::integer("h1", kMlpMinWidth, kMlpMaxWidth),
                            Dimension::integer("h2", kMlpMinWidth, kMlpMaxWidth),
                            Dimension::log_continuous("learning_rate", 1e-4, 1e-1)});
    p.objective_ = [](std::span<const double> e) {
      return branin(-5.0 + 15.0 * e[2], 15.0 * 0.5 * (e[0] + e[1]));
    };
    for (const auto& m : kBraninMin) {
      const double v = m[1] / 15.0;
      mins.push_back(Eigen::Vector3d(v, v, (m[0] + 5.0) / 15.0));
    }
    const SearchSpace space = p.space_;
    p.features_ = [space](std::span<const double> e) {
      return mlp_sim_features(space, e);
    };
  } else {
    throw ConfigError("unknown objective '" + std::string(objective) + "'");
  }
  if (field == CostField::kFlops && !p.features_) {
    throw ConfigError("cost field 'flops' is only defined for mlp-sim");
  }

  const auto d = static_cast<Eigen::Index>(p.space_.encoded_dim());
  p.minimizers_.resize(static_cast<Eigen::Index>(mins.size()), d);
  for (std::size_t i = 0; i < mins.size(); ++i) {
    p.minimizers_.row(static_cast<Eigen::Index>(i)) = mins[i].transpose();
  }
  p.optimum_value_ = std::numeric_limits<double>::infinity();
  for (const auto& m : mins) {
    p.optimum_value_ = std::min(p.optimum_value_, p.objective_(as_span(m)));
  }

  if (field == CostField::kCheapOptimum || field == CostField::kExpensiveOptimum) {
    // Largest distance to the nearest minimizer, over the cube corners and a
    // dense low-discrepancy sample.
    Eigen::MatrixXd probe = sobol_points(static_cast<std::size_t>(d), 8192);
    const Eigen::Index corners = Eigen::Index{1} << d;
    const Eigen::Index n_sobol = probe.rows();
    probe.conservativeResize(n_sobol + corners, d);
    for (Eigen::Index c = 0; c < corners; ++c) {
      for (Eigen::Index k = 0; k < d; ++k) probe(n_sobol + c, k) = (c >> k) & 1 ? 1.0 : 0.0;
    }
    Eigen::VectorXd nearest = Eigen::VectorXd::Constant(probe.rows(),
                                                        std::numeric_limits<double>::infinity());
    for (Eigen::Index i = 0; i < p.minimizers_.rows(); ++i) {
      const Eigen::VectorXd m = p.minimizers_.row(i).transpose();
      simd::min_sq_dist_update(m, probe, nearest);
    }
    p.max_distance_ = std::sqrt(nearest.maxCoeff());
  } else if (field == CostField::kFlops) {
    const std::array<std::int64_t, 4> lo{kMlpInput, kMlpMinWidth, kMlpMinWidth, kMlpOutput};
    const std::array<std::int64_t, 4> hi{kMlpInput, kMlpMaxWidth, kMlpMaxWidth, kMlpOutput};
    const double rmin = mlp_flops_raw(mlp_features(lo));
    const double rmax = mlp_flops_raw(mlp_features(hi));
    const double scale = 9.0 / (rmax - rmin);
    p.flop_coeffs_ = {scale, 5.0 * scale, 1.0 - scale * rmin};
  }
  return p;
}

double SyntheticProblem::objective(std::span<const double> encoded) const {
  if (encoded.size() != space_.encoded_dim()) {
    throw SchemaError(name_ + ": expected " + std::to_string(space_.encoded_dim()) +
                      " encoded coordinates, got " + std::to_string(encoded.size()));
  }
  return objective_(encoded);
}

double SyntheticProblem::cost(std::span<const double> encoded) const {
  if (encoded.size() != space_.encoded_dim()) {
    throw SchemaError(name_ + ": expected " + std::to_string(space_.encoded_dim()) +
                      " encoded coordinates, got " + std::to_string(encoded.size()));
  }
  switch (field_) {
    case CostField::kConstant:
      return 1.0;
    case CostField::kFlops: {
      const FlopFeatures f = features_(encoded);
      return flop_coeffs_[0] * f.quad + flop_coeffs_[1] * f.linear + flop_coeffs_[2];
    }
    case CostField::kCheapOptimum:
    case CostField::kExpensiveOptimum: {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = 0; i < minimizers_.rows(); ++i) {
        double s = 0.0;
        for (Eigen::Index k = 0; k < minimizers_.cols(); ++k) {
          const double diff = encoded[static_cast<std::size_t>(k)] - minimizers_(i, k);
          s += diff * diff;
        }
        best = std::min(best, s);
      }
      const double e = std::min(std::sqrt(best) / max_distance_, 1.0);
      return field_ == CostField::kCheapOptimum ? std::pow(10.0, e)
                                                : std::pow(10.0, 1.0 - e);
    }
  }
  return 1.0;
}

SimulatedEvaluator::SimulatedEvaluator(SyntheticProblem problem)
    : problem_(std::move(problem)) {}

std::vector<EvalResult> SimulatedEvaluator::evaluate_batch(
    std::span<const Point> points, std::span<const std::uint64_t> seeds) {
  if (seeds.size() != points.size()) {
    throw ArgumentError("evaluate_batch: one seed per point required");
  }
  std::vector<EvalResult> out(points.size());
  double batch_max = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto x = as_span(points[i].encoded);
    double y = problem_.objective(x);
    if (problem_.noise_std() > 0.0) {
      Rng rng(seeds[i]);
      y += problem_.noise_std() * standard_normal(rng);
    }
    out[i].objective = y;
    out[i].cost = problem_.cost(x);
    batch_max = std::max(batch_max, out[i].cost);
    total_cost_ += out[i].cost;
  }
  elapsed_ += batch_max;
  evaluations_ += points.size();
  return out;
}

}  // namespace carbo
