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

// Data-parallel distance kernels behind the initial design (fill, min-distance
// bookkeeping) and the Matérn cross-covariance in the GP surrogate.
//
// Points are stored column-major: coordinate k of point i lives at
// points[k * ld + i], so each coordinate is a contiguous run across points and
// vector lanes map to points. Every variant accumulates coordinates in the same
// order with separate multiply and add, so all levels agree bit for bit.

#include <cstddef>
#include <span>
#include <string_view>

#include <Eigen/Dense>

namespace carbo::simd {

enum class Level { kScalar, kAvx2, kNeon };

std::string_view level_name(Level level);

// Best level supported by both the build and the running CPU.
Level detected_level();

// Level used by the dispatching entry points. Starts at detected_level()
// unless the CARBO_SIMD environment variable names a lower one.
Level active_level();

// Returns false (and leaves the level unchanged) if `level` is unavailable.
bool set_active_level(Level level);

bool level_available(Level level);

namespace scalar {
void sq_dist_to_many(const double* query, std::size_t dim, const double* points,
                     std::size_t n, std::size_t ld, double* out);
void min_sq_dist_update(const double* query, std::size_t dim,
                        const double* points, std::size_t n, std::size_t ld,
                        double* mins);
}  // namespace scalar

namespace avx2 {
void sq_dist_to_many(const double* query, std::size_t dim, const double* points,
                     std::size_t n, std::size_t ld, double* out);
void min_sq_dist_update(const double* query, std::size_t dim,
                        const double* points, std::size_t n, std::size_t ld,
                        double* mins);
}  // namespace avx2

namespace neon {
void sq_dist_to_many(const double* query, std::size_t dim, const double* points,
                     std::size_t n, std::size_t ld, double* out);
void min_sq_dist_update(const double* query, std::size_t dim,
                        const double* points, std::size_t n, std::size_t ld,
                        double* mins);
}  // namespace neon

// out[i] = ||query - point_i||^2
void sq_dist_to_many(const double* query, std::size_t dim, const double* points,
                     std::size_t n, std::size_t ld, double* out);

// mins[i] = min(mins[i], ||query - point_i||^2)
void min_sq_dist_update(const double* query, std::size_t dim,
                        const double* points, std::size_t n, std::size_t ld,
                        double* mins);

inline void sq_dist_to_many(const Eigen::Ref<const Eigen::VectorXd>& query,
                            const Eigen::MatrixXd& points,
                            Eigen::VectorXd& out) {
  out.resize(points.rows());
  sq_dist_to_many(query.data(), static_cast<std::size_t>(query.size()),
                  points.data(), static_cast<std::size_t>(points.rows()),
                  static_cast<std::size_t>(points.rows()), out.data());
}

inline void min_sq_dist_update(const Eigen::Ref<const Eigen::VectorXd>& query,
                               const Eigen::MatrixXd& points,
                               Eigen::VectorXd& mins) {
  min_sq_dist_update(query.data(), static_cast<std::size_t>(query.size()),
                     points.data(), static_cast<std::size_t>(points.rows()),
                     static_cast<std::size_t>(points.rows()), mins.data());
}

}  // namespace carbo::simd
