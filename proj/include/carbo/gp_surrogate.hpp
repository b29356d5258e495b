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

// Gaussian-process regression over encoded points with a Matérn-5/2 ARD
// kernel:
//
//   k(x, x') = s^2 (1 + sqrt(5) r + 5 r^2 / 3) exp(-sqrt(5) r),
//   r^2 = sum_k ((x_k - x'_k) / l_k)^2
//
// Targets are standardized (zero mean, unit variance) after subtracting an
// optional deterministic mean function; kernel hyperparameters live in
// standardized units. Fitted surrogates are immutable values.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace carbo {

struct KernelParams {
  double signal_variance = 1.0;
  Eigen::VectorXd lengthscales;
  double noise_variance = 1e-6;
};

struct Interval {
  double lo;
  double hi;
};

struct HyperparameterBounds {
  Interval lengthscale{1e-3, 10.0};
  Interval signal_variance{1e-4, 10.0};
  Interval noise_variance{1e-8, 1.0};
};

// Restart 0 starts at (l = 0.5, s^2 = 1, noise = 1e-3), or at `initial` when
// given. Further restarts draw each parameter log-uniformly from
// l in [0.05, 2], s^2 in [0.2, 5], noise in [1e-6, 1e-1], clamped to bounds.
struct GpFitOptions {
  int restarts = 5;
  std::uint64_t seed = 0;
  HyperparameterBounds bounds;
  int max_iterations = 200;
  std::optional<KernelParams> initial;
};

struct Standardization {
  double mean = 0.0;
  double scale = 1.0;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

using MeanFunction = std::function<double(std::span<const double>)>;

double matern52(double r);

// Log marginal likelihood of standardized targets z under `params`, and its
// gradient with respect to (log l_1..log l_d, log s^2, log noise) when
// `grad` is non-null. Throws NumericalError if K cannot be factorized.
double log_marginal_likelihood(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& z,
                               const KernelParams& params,
                               Eigen::VectorXd* grad = nullptr);

class GpSurrogate {
 public:
  // x holds one encoded point per row.
  static GpSurrogate fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         MeanFunction mean_fn = {},
                         const GpFitOptions& options = {});

  // Builds the posterior for fixed hyperparameters and standardization.
  static GpSurrogate with_params(const Eigen::MatrixXd& x,
                                 const Eigen::VectorXd& y,
                                 const KernelParams& params,
                                 const Standardization& standardization,
                                 MeanFunction mean_fn = {});

  Prediction predict(std::span<const double> p) const;
  // True when `other` has the same inputs, hyperparameters, factorization and
  // standardization, so the two differ only in their targets.
  bool shares_covariance(const GpSurrogate& other) const;
  // Predictions of surrogates that share this one's covariance: one kernel
  // row and one triangular solve serve every mean. out.size() must equal
  // siblings.size().
  void predict_siblings(std::span<const double> p,
                        std::span<const GpSurrogate> siblings,
                        std::span<Prediction> out) const;
  double sample_posterior(std::span<const double> p, std::uint64_t seed) const;
  GpSurrogate condition_on(std::span<const double> p, double y) const;

  // Mean function plus standardization offset: where predictions revert far
  // from data.
  double prior_mean(std::span<const double> p) const;
  // Signal variance in the units of y.
  double prior_variance() const;

  const KernelParams& params() const { return params_; }
  const Standardization& standardization() const { return standardization_; }
  const Eigen::MatrixXd& train_x() const { return x_; }
  const Eigen::VectorXd& train_y() const { return y_; }
  const Eigen::MatrixXd& cholesky() const { return chol_; }
  double jitter() const { return jitter_; }
  std::size_t size() const { return static_cast<std::size_t>(x_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(x_.cols()); }
  double log_likelihood() const { return log_likelihood_; }
  bool has_mean_function() const { return static_cast<bool>(mean_fn_); }

  // K + (noise + jitter) I on the training inputs, standardized units.
  Eigen::MatrixXd covariance() const;

 private:
  GpSurrogate() = default;
  void factorize();
  void refresh_weights();
  void kernel_row(std::span<const double> p, Eigen::VectorXd& out) const;

  KernelParams params_;
  Standardization standardization_;
  MeanFunction mean_fn_;
  Eigen::MatrixXd x_;
  Eigen::MatrixXd scaled_x_;  // x_ / lengthscale, column-major for SIMD
  Eigen::VectorXd y_;
  Eigen::VectorXd z_;  // standardized residual targets
  Eigen::MatrixXd chol_;
  Eigen::VectorXd weights_;  // (K + noise I)^-1 z
  double jitter_ = 0.0;
  double log_likelihood_ = 0.0;
};

}  // namespace carbo
