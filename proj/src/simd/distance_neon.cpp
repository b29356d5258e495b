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

#include <arm_neon.h>

#include <algorithm>

#include "carbo/simd/distance.hpp"

namespace carbo::simd::neon {

void sq_dist_to_many(const double* query, std::size_t dim, const double* points,
                     std::size_t n, std::size_t ld, double* out) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      const float64x2_t diff =
          vsubq_f64(vld1q_f64(points + k * ld + i), vdupq_n_f64(query[k]));
      acc = vaddq_f64(acc, vmulq_f64(diff, diff));
    }
    vst1q_f64(out + i, acc);
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double diff = points[k * ld + i] - query[k];
      acc = acc + diff * diff;
    }
    out[i] = acc;
  }
}

void min_sq_dist_update(const double* query, std::size_t dim,
                        const double* points, std::size_t n, std::size_t ld,
                        double* mins) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t acc = vdupq_n_f64(0.0);
    for (std::size_t k = 0; k < dim; ++k) {
      const float64x2_t diff =
          vsubq_f64(vld1q_f64(points + k * ld + i), vdupq_n_f64(query[k]));
      acc = vaddq_f64(acc, vmulq_f64(diff, diff));
    }
    const float64x2_t m = vld1q_f64(mins + i);
    // Select acc only where it is strictly smaller; NaN compares false.
    vst1q_f64(mins + i, vbslq_f64(vcltq_f64(acc, m), acc, m));
  }
  for (; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double diff = points[k * ld + i] - query[k];
      acc = acc + diff * diff;
    }
    mins[i] = std::min(mins[i], acc);
  }
}

}  // namespace carbo::simd::neon
