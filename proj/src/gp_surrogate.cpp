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

#include "carbo/gp_surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>
#include <string>

#include "carbo/detail/box_optimizer.hpp"
#include "carbo/errors.hpp"
#include "carbo/rng.hpp"
#include "carbo/simd/distance.hpp"

namespace carbo {

namespace {

constexpr double kSqrt5 = 2.2360679774997896964091736687313;
constexpr double kJitterStart = 1e-10;
constexpr double kJitterMax = 1e-4;

Eigen::MatrixXd scale_columns(const Eigen::MatrixXd& x,
                              const Eigen::VectorXd& lengthscales) {
  return x * lengthscales.cwiseInverse().asDiagonal();
}

// Pairwise squared distances between the rows of a column-major matrix.
Eigen::MatrixXd pairwise_sq_dist(const Eigen::MatrixXd& sx) {
  const Eigen::Index n = sx.rows();
  const auto d = static_cast<std::size_t>(sx.cols());
  Eigen::MatrixXd r2(n, n);
  Eigen::VectorXd q(sx.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    q = sx.row(i).transpose();
    simd::sq_dist_to_many(q.data(), d, sx.data(), static_cast<std::size_t>(n),
                          static_cast<std::size_t>(n), r2.col(i).data());
  }
  return r2;
}

struct Factorization {
  Eigen::MatrixXd chol;
  double jitter = 0.0;
};

// Cholesky of k_noisy + jitter I with jitter escalating by 10x from
// 1e-10 * trace/n up to 1e-4 * trace/n.
Factorization factorize_with_jitter(const Eigen::MatrixXd& k_noisy) {
  const Eigen::Index n = k_noisy.rows();
  const double scale = std::max(k_noisy.trace() / static_cast<double>(n), 1e-300);
  for (double rel = kJitterStart; rel <= kJitterMax * (1.0 + 1e-9); rel *= 10.0) {
    Eigen::MatrixXd k = k_noisy;
    const double jitter = rel * scale;
    k.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd l = llt.matrixL();
      if ((l.diagonal().array() > 0.0).all() && l.allFinite()) {
        return {std::move(l), jitter};
      }
    }
  }
  throw NumericalError("Cholesky factorization failed after jitter escalation");
}

Eigen::VectorXd pack(const KernelParams& p) {
  const Eigen::Index d = p.lengthscales.size();
  Eigen::VectorXd theta(d + 2);
  theta.head(d) = p.lengthscales.array().log().matrix();
  theta[d] = std::log(p.signal_variance);
  theta[d + 1] = std::log(p.noise_variance);
  return theta;
}

KernelParams unpack(const Eigen::VectorXd& theta) {
  const Eigen::Index d = theta.size() - 2;
  KernelParams p;
  p.lengthscales = theta.head(d).array().exp().matrix();
  p.signal_variance = std::exp(theta[d]);
  p.noise_variance = std::exp(theta[d + 1]);
  return p;
}

}  // namespace

double matern52(double r) {
  const double a = kSqrt5 * r;
  return (1.0 + a + a * a / 3.0) * std::exp(-a);
}

double log_marginal_likelihood(const Eigen::MatrixXd& x,
                               const Eigen::VectorXd& z,
                               const KernelParams& params,
                               Eigen::VectorXd* grad) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  const Eigen::MatrixXd sx = scale_columns(x, params.lengthscales);
  const Eigen::MatrixXd r2 = pairwise_sq_dist(sx);
  const double s2 = params.signal_variance;

  // e = exp(-sqrt5 r) is shared by the kernel and its derivatives.
  Eigen::MatrixXd kf(n, n);
  Eigen::MatrixXd dk(n, n);  // (5/3) s^2 (1 + sqrt5 r) e
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double a = kSqrt5 * std::sqrt(r2(i, j));
      const double e = std::exp(-a);
      kf(i, j) = s2 * (1.0 + a + a * a / 3.0) * e;
      dk(i, j) = (5.0 / 3.0) * s2 * (1.0 + a) * e;
    }
  }
  Eigen::MatrixXd ky = kf;
  ky.diagonal().array() += params.noise_variance;
  const Factorization fac = factorize_with_jitter(ky);
  const auto L = fac.chol.triangularView<Eigen::Lower>();
  const Eigen::VectorXd alpha = L.transpose().solve(L.solve(z));

  const double log_det = 2.0 * fac.chol.diagonal().array().log().sum();
  const double lml = -0.5 * z.dot(alpha) - 0.5 * log_det -
                     0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  if (grad != nullptr) {
    grad->resize(d + 2);
    Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(n, n);
    L.solveInPlace(linv);
    Eigen::MatrixXd w = alpha * alpha.transpose();
    w.noalias() -= linv.transpose() * linv;

    // d k / d log l_k = (5/3) s^2 (1 + sqrt5 r) e^{-sqrt5 r} (dx_k / l_k)^2
    const Eigen::MatrixXd m = w.cwiseProduct(dk);
    const Eigen::VectorXd row_sums = m.rowwise().sum();
    for (Eigen::Index k = 0; k < d; ++k) {
      const Eigen::VectorXd a = sx.col(k);
      // sum_ij m_ij (a_i - a_j)^2 with m symmetric
      const double tr = 2.0 * a.cwiseAbs2().dot(row_sums) - 2.0 * a.dot(m * a);
      (*grad)[k] = 0.5 * tr;
    }
    (*grad)[d] = 0.5 * (w.cwiseProduct(kf)).sum();
    (*grad)[d + 1] = 0.5 * params.noise_variance * w.trace();
  }
  return lml;
}

GpSurrogate GpSurrogate::with_params(const Eigen::MatrixXd& x,
                                     const Eigen::VectorXd& y,
                                     const KernelParams& params,
                                     const Standardization& standardization,
                                     MeanFunction mean_fn) {
  if (x.rows() != y.size() || x.rows() < 1) {
    throw DataError("GP needs matching, nonempty inputs and targets");
  }
  if (params.lengthscales.size() != x.cols()) {
    throw ArgumentError("lengthscale count does not match input dimension");
  }
  GpSurrogate g;
  g.params_ = params;
  g.standardization_ = standardization;
  g.mean_fn_ = std::move(mean_fn);
  g.x_ = x;
  g.y_ = y;
  g.z_.resize(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double m = g.mean_fn_ ? g.mean_fn_(std::span<const double>(
                                      x.row(i).transpose().eval().data(),
                                      static_cast<std::size_t>(x.cols())))
                                : 0.0;
    g.z_[i] = (y[i] - m - standardization.mean) / standardization.scale;
  }
  g.scaled_x_ = scale_columns(x, params.lengthscales);
  g.factorize();
  return g;
}

Eigen::MatrixXd GpSurrogate::covariance() const {
  const Eigen::MatrixXd r2 = pairwise_sq_dist(scaled_x_);
  Eigen::MatrixXd k = r2.unaryExpr([&](double v) {
    return params_.signal_variance * matern52(std::sqrt(v));
  });
  k.diagonal().array() += params_.noise_variance + jitter_;
  return k;
}

void GpSurrogate::factorize() {
  const Eigen::MatrixXd r2 = pairwise_sq_dist(scaled_x_);
  Eigen::MatrixXd k = r2.unaryExpr([&](double v) {
    return params_.signal_variance * matern52(std::sqrt(v));
  });
  k.diagonal().array() += params_.noise_variance;
  Factorization fac = factorize_with_jitter(k);
  chol_ = std::move(fac.chol);
  jitter_ = fac.jitter;
  refresh_weights();
}

void GpSurrogate::refresh_weights() {
  const auto L = std::as_const(chol_).triangularView<Eigen::Lower>();
  weights_ = L.transpose().solve(L.solve(z_));
  const double n = static_cast<double>(z_.size());
  log_likelihood_ = -0.5 * z_.dot(weights_) -
                    chol_.diagonal().array().log().sum() -
                    0.5 * n * std::log(2.0 * std::numbers::pi);
}

void GpSurrogate::kernel_row(std::span<const double> p,
                             Eigen::VectorXd& out) const {
  const Eigen::Index d = x_.cols();
  Eigen::VectorXd q(d);
  for (Eigen::Index k = 0; k < d; ++k) {
    q[k] = p[static_cast<std::size_t>(k)] / params_.lengthscales[k];
  }
  out.resize(x_.rows());
  simd::sq_dist_to_many(q.data(), static_cast<std::size_t>(d), scaled_x_.data(),
                        static_cast<std::size_t>(x_.rows()),
                        static_cast<std::size_t>(x_.rows()), out.data());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out[i] = params_.signal_variance * matern52(std::sqrt(out[i]));
  }
}

double GpSurrogate::prior_mean(std::span<const double> p) const {
  return (mean_fn_ ? mean_fn_(p) : 0.0) + standardization_.mean;
}

double GpSurrogate::prior_variance() const {
  return params_.signal_variance * standardization_.scale * standardization_.scale;
}

Prediction GpSurrogate::predict(std::span<const double> p) const {
  if (p.size() != dim()) {
    throw SchemaError("predict: point has " + std::to_string(p.size()) +
                      " coordinates, expected " + std::to_string(dim()));
  }
  Eigen::VectorXd k;
  kernel_row(p, k);
  const double mean_z = k.dot(weights_);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  const double var_z = std::max(0.0, params_.signal_variance - v.squaredNorm());
  const double scale = standardization_.scale;
  return {prior_mean(p) + scale * mean_z, scale * scale * var_z};
}

bool GpSurrogate::shares_covariance(const GpSurrogate& other) const {
  return params_.signal_variance == other.params_.signal_variance &&
         params_.noise_variance == other.params_.noise_variance &&
         params_.lengthscales == other.params_.lengthscales &&
         standardization_.mean == other.standardization_.mean &&
         standardization_.scale == other.standardization_.scale &&
         !mean_fn_ && !other.mean_fn_ && x_ == other.x_ && chol_ == other.chol_;
}

void GpSurrogate::predict_siblings(std::span<const double> p,
                                   std::span<const GpSurrogate> siblings,
                                   std::span<Prediction> out) const {
  if (p.size() != dim()) {
    throw SchemaError("predict: point has " + std::to_string(p.size()) +
                      " coordinates, expected " + std::to_string(dim()));
  }
  if (out.size() != siblings.size()) {
    throw ArgumentError("predict_siblings: output size differs from sibling count");
  }
  Eigen::VectorXd k;
  kernel_row(p, k);
  const Eigen::VectorXd v = chol_.triangularView<Eigen::Lower>().solve(k);
  const double var_z = std::max(0.0, params_.signal_variance - v.squaredNorm());
  const double scale = standardization_.scale;
  const double m0 = prior_mean(p);
  for (std::size_t i = 0; i < siblings.size(); ++i) {
    out[i] = {m0 + scale * k.dot(siblings[i].weights_), scale * scale * var_z};
  }
}

double GpSurrogate::sample_posterior(std::span<const double> p,
                                     std::uint64_t seed) const {
  const Prediction pred = predict(p);
  if (pred.variance <= 0.0) return pred.mean;
  Rng rng(seed);
  return pred.mean + std::sqrt(pred.variance) * standard_normal(rng);
}

GpSurrogate GpSurrogate::condition_on(std::span<const double> p,
                                      double y) const {
  if (p.size() != dim()) throw SchemaError("condition_on: dimension mismatch");
  if (!std::isfinite(y)) throw DataError("condition_on: non-finite target");
  GpSurrogate g = *this;
  const Eigen::Index n = x_.rows();
  const Eigen::Index d = x_.cols();
  Eigen::VectorXd k;
  kernel_row(p, k);

  g.x_.conservativeResize(n + 1, d);
  g.scaled_x_.conservativeResize(n + 1, d);
  for (Eigen::Index c = 0; c < d; ++c) {
    g.x_(n, c) = p[static_cast<std::size_t>(c)];
    g.scaled_x_(n, c) = p[static_cast<std::size_t>(c)] / params_.lengthscales[c];
  }
  g.y_.conservativeResize(n + 1);
  g.y_[n] = y;
  g.z_.conservativeResize(n + 1);
  const double m = mean_fn_ ? mean_fn_(p) : 0.0;
  g.z_[n] = (y - m - standardization_.mean) / standardization_.scale;

  // Rank-one extension of the Cholesky factor; fall back to a full
  // factorization when the new pivot is not safely positive.
  const Eigen::VectorXd l = chol_.triangularView<Eigen::Lower>().solve(k);
  const double pivot =
      params_.signal_variance + params_.noise_variance + jitter_ - l.squaredNorm();
  if (pivot > 1e-14 * (params_.signal_variance + params_.noise_variance)) {
    g.chol_ = Eigen::MatrixXd::Zero(n + 1, n + 1);
    g.chol_.topLeftCorner(n, n) = chol_;
    g.chol_.block(n, 0, 1, n) = l.transpose();
    g.chol_(n, n) = std::sqrt(pivot);
    g.refresh_weights();
  } else {
    g.factorize();
  }
  return g;
}

GpSurrogate GpSurrogate::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                             MeanFunction mean_fn, const GpFitOptions& options) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  if (n < 1 || n != y.size()) {
    throw DataError("GP fit needs at least one observation and matching sizes");
  }
  if (!y.allFinite()) throw DataError("GP fit: non-finite target value");
  if (!x.allFinite()) throw DataError("GP fit: non-finite input coordinate");

  Eigen::VectorXd resid = y;
  if (mean_fn) {
    Eigen::VectorXd row(d);
    for (Eigen::Index i = 0; i < n; ++i) {
      row = x.row(i).transpose();
      const double m = mean_fn(std::span<const double>(row.data(), static_cast<std::size_t>(d)));
      if (!std::isfinite(m)) throw DataError("GP fit: mean function returned a non-finite value");
      resid[i] -= m;
    }
  }
  Standardization st;
  st.mean = resid.mean();
  const double var = (resid.array() - st.mean).square().mean();
  st.scale = std::sqrt(var);
  if (n == 1 || !(st.scale > 1e-12 * (1.0 + std::abs(st.mean)))) st.scale = 1.0;
  const Eigen::VectorXd z = (resid.array() - st.mean) / st.scale;

  const auto& b = options.bounds;
  Eigen::VectorXd lo(d + 2), hi(d + 2);
  lo.head(d).setConstant(std::log(b.lengthscale.lo));
  hi.head(d).setConstant(std::log(b.lengthscale.hi));
  lo[d] = std::log(b.signal_variance.lo);
  hi[d] = std::log(b.signal_variance.hi);
  lo[d + 1] = std::log(b.noise_variance.lo);
  hi[d + 1] = std::log(b.noise_variance.hi);

  const detail::Objective objective = [&](const Eigen::VectorXd& theta,
                                          Eigen::VectorXd* grad) {
    try {
      return log_marginal_likelihood(x, z, unpack(theta), grad);
    } catch (const NumericalError&) {
      return -std::numeric_limits<double>::infinity();
    }
  };

  Rng rng(options.seed);
  auto log_uniform = [&](double a, double c) {
    return std::log(a) + uniform01(rng) * (std::log(c) - std::log(a));
  };

  detail::BoxOptimizerOptions opt;
  opt.max_iterations = options.max_iterations;
  std::optional<detail::BoxOptimizerResult> best;
  const int restarts = std::max(1, options.restarts);
  for (int r = 0; r < restarts; ++r) {
    Eigen::VectorXd theta0(d + 2);
    if (r == 0) {
      if (options.initial && options.initial->lengthscales.size() == d) {
        theta0 = pack(*options.initial);
      } else {
        theta0.head(d).setConstant(std::log(0.5));
        theta0[d] = 0.0;
        theta0[d + 1] = std::log(1e-3);
      }
    } else {
      for (Eigen::Index k = 0; k < d; ++k) theta0[k] = log_uniform(0.05, 2.0);
      theta0[d] = log_uniform(0.2, 5.0);
      theta0[d + 1] = log_uniform(1e-6, 1e-1);
    }
    auto res = detail::maximize_in_box(objective, theta0, lo, hi, opt);
    if (!std::isfinite(res.value)) continue;
    if (!best || res.value > best->value) best = std::move(res);
  }
  if (!best) {
    throw NumericalError("GP fit: marginal likelihood could not be evaluated at any start");
  }
  return with_params(x, y, unpack(best->x), st, std::move(mean_fn));
}

}  // namespace carbo
