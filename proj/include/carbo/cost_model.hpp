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

// Positive cost surrogates c(x). Three families:
//
//  * WarpedGpCost: a GP on log cost, predicting exp(posterior mean).
//  * FlopCostModel: a linear model over flop-count features fit with the
//    Huber loss, for MLP and CNN training-time prediction.
//  * HybridCost: a GP on log cost whose mean is the log of a FlopCostModel.
//
// Every prediction is floored at a positive cost_floor so acquisition
// divisors stay bounded.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "carbo/gp_surrogate.hpp"

namespace carbo {

inline constexpr double kDefaultCostFloor = 1e-6;

struct CostSample {
  Eigen::VectorXd encoded;
  double cost = 0.0;
};

class CostModel {
 public:
  virtual ~CostModel() = default;
  virtual double predict(std::span<const double> encoded) const = 0;
  virtual std::string_view kind() const = 0;
};

inline double predict_cost(const CostModel& model, std::span<const double> p) {
  return model.predict(p);
}

// Used before any cost has been observed.
class ConstantCost final : public CostModel {
 public:
  explicit ConstantCost(double value = 1.0, double floor = kDefaultCostFloor);
  double predict(std::span<const double>) const override { return value_; }
  std::string_view kind() const override { return "constant"; }

 private:
  double value_;
};

class WarpedGpCost final : public CostModel {
 public:
  WarpedGpCost(GpSurrogate log_gp, double cost_floor);
  double predict(std::span<const double> encoded) const override;
  std::string_view kind() const override { return "warped-gp"; }
  const GpSurrogate& log_gp() const { return log_gp_; }
  double cost_floor() const { return cost_floor_; }

 private:
  GpSurrogate log_gp_;
  double cost_floor_;
};

// Throws DataError on an empty sample list or a nonpositive cost.
WarpedGpCost fit_warped_gp(std::span<const CostSample> observations,
                           const GpFitOptions& options = {},
                           double cost_floor = kDefaultCostFloor);

// ---------------------------------------------------------------------------
// Flop-count features

struct FlopFeatures {
  double conv = 0.0;
  double pool = 0.0;
  double quad = 0.0;    // sum of consecutive layer-size products
  double linear = 0.0;  // sum of layer sizes
};

// quad = sum_i n_i n_{i+1}, linear = sum_i n_i.
FlopFeatures mlp_features(std::span<const std::int64_t> layer_sizes);

struct CnnShape {
  std::vector<std::int64_t> channels;  // m_1..m_k
  std::vector<double> pool_ratios;     // p_1..p_k in (0, 1]
  std::int64_t kernel = 1;             // r
  std::int64_t input_size = 1;         // I (inputs are I x I x c)
  std::int64_t color_channels = 1;     // c
  // Hidden layers of the dense tail; its input layer has I^2 p_k m_k units.
  std::vector<std::int64_t> mlp_tail;
};

//   conv = I^2 r^2 c m_1 + sum_{i<k} I^2 r^2 m_i m_{i+1}
//   pool = sum_i I^2 p_i m_i
// plus quad/linear of the dense tail (I^2 p_k m_k, mlp_tail...).
FlopFeatures cnn_features(const CnnShape& shape);
double cnn_tail_input_size(const CnnShape& shape);

enum class Architecture { kMlp, kCnn };

std::string_view to_string(Architecture arch);
Architecture parse_architecture(std::string_view text);

// Recorded with a fitted model; batch size and epochs scale every feature
// uniformly, so they are folded into the coefficients.
struct ArchitectureConstants {
  std::int64_t batch_size = 100;
  std::int64_t epochs = 200;
  std::int64_t input_size = 0;
  std::int64_t color_channels = 0;
  std::int64_t kernel_size = 0;
};

// Columns of the regression design for an architecture: MLP uses
// (quad, linear, intercept), CNN all five.
std::vector<std::string> feature_columns(Architecture arch);
Eigen::MatrixXd design_matrix(std::span<const FlopFeatures> features,
                              Architecture arch);

struct FlopCostModel {
  // conv, pool, quad, linear, intercept
  Eigen::Matrix<double, 5, 1> coeffs = Eigen::Matrix<double, 5, 1>::Zero();
  double huber_delta = 0.0;
  Architecture architecture = Architecture::kMlp;
  ArchitectureConstants constants;
  double cost_floor = kDefaultCostFloor;

  double raw_predict(const FlopFeatures& f) const;
  double predict(const FlopFeatures& f) const;
};

// ---------------------------------------------------------------------------
// Robust regression

struct HuberOptions {
  // Fixed threshold; when unset, delta = 1.35 * MAD of the least-squares
  // residuals, re-estimated once from the Huber residuals.
  std::optional<double> delta;
  int max_iterations = 100;
  double tolerance = 1e-8;
};

struct RegressionResult {
  Eigen::VectorXd coeffs;
  double delta = 0.0;
  int iterations = 0;
};

// Ordinary least squares via column-pivoted QR on column-normalized data.
// Throws NumericalError naming collinear columns when rank deficient.
RegressionResult least_squares(const Eigen::MatrixXd& a, const Eigen::VectorXd& y,
                               std::span<const std::string> column_names = {});

// Minimizes sum_i huber_delta(y_i - a_i . c) by iteratively reweighted least
// squares, starting from the least-squares solution.
RegressionResult huber_regression(const Eigen::MatrixXd& a,
                                  const Eigen::VectorXd& y,
                                  const HuberOptions& options = {},
                                  std::span<const std::string> column_names = {});

FlopCostModel fit_huber(std::span<const FlopFeatures> features,
                        const Eigen::VectorXd& costs, Architecture arch,
                        const HuberOptions& options = {},
                        const ArchitectureConstants& constants = {});

nlohmann::json to_json(const FlopCostModel& model);
FlopCostModel flop_cost_model_from_json(const nlohmann::json& doc);
void save_flop_cost_model(const FlopCostModel& model,
                          const std::filesystem::path& path);
FlopCostModel load_flop_cost_model(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Adapters over encoded points

using FeatureMap = std::function<FlopFeatures(std::span<const double>)>;

class FlopCost final : public CostModel {
 public:
  FlopCost(FlopCostModel model, FeatureMap features);
  double predict(std::span<const double> encoded) const override;
  std::string_view kind() const override { return "flop-linear"; }
  const FlopCostModel& model() const { return model_; }

 private:
  FlopCostModel model_;
  FeatureMap features_;
};

class HybridCost final : public CostModel {
 public:
  HybridCost(FlopCostModel linear, FeatureMap features,
             std::optional<GpSurrogate> residual_gp);
  double predict(std::span<const double> encoded) const override;
  std::string_view kind() const override { return "hybrid"; }
  const FlopCostModel& linear() const { return linear_; }
  const std::optional<GpSurrogate>& residual_gp() const { return residual_gp_; }

 private:
  FlopCostModel linear_;
  FeatureMap features_;
  std::optional<GpSurrogate> residual_gp_;
};

// The residual GP fits log(cost) with mean log(linear prediction).
HybridCost fit_hybrid(const FlopCostModel& linear, FeatureMap features,
                      std::span<const CostSample> observations,
                      const GpFitOptions& options = {});

// ---------------------------------------------------------------------------
// Refitting policy used by the design and optimization loops

enum class CostModelKind { kWarpedGp, kFlopLinear, kHybrid };

std::string_view to_string(CostModelKind kind);
CostModelKind parse_cost_model_kind(std::string_view text);

using CostSurrogateFactory = std::function<std::shared_ptr<const CostModel>(
    std::span<const CostSample>, std::uint64_t seed)>;

// With no samples every factory returns ConstantCost(1). The flop-based kinds
// need a feature map and fall back to a constant at the geometric-mean cost
// while there are too few (or collinear) samples for the regression.
CostSurrogateFactory make_cost_factory(CostModelKind kind,
                                       FeatureMap features = {},
                                       Architecture arch = Architecture::kMlp,
                                       double cost_floor = kDefaultCostFloor);

}  // namespace carbo
