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

// Compiled with -mavx2 only; callers reach it through the dispatcher after a
// CPUID check. No FMA: lanes must round exactly like the scalar kernel.

#include <immintrin.h>

#include <algorithm>

#include "carbo/simd/distance.hpp"

namespace carbo::simd::avx2 {

void sq_dist_to_many(const double* query, std::size_t dim, const double* points,
                     std::size_t n, std::size_t ld, double* out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < dim; ++k) {
      const __m256d p = _mm256_loadu_pd(points + k * ld + i);
      const __m256d diff = _mm256_sub_pd(p, _mm256_set1_pd(query[k]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    _mm256_storeu_pd(out + i, acc);
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
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t k = 0; k < dim; ++k) {
      const __m256d p = _mm256_loadu_pd(points + k * ld + i);
      const __m256d diff = _mm256_sub_pd(p, _mm256_set1_pd(query[k]));
      acc = _mm256_add_pd(acc, _mm256_mul_pd(diff, diff));
    }
    // min_pd(a, b) returns b when either is NaN; keep mins on the b side so a
    // NaN distance never replaces a finite minimum, matching std::min(m, acc).
    const __m256d m = _mm256_loadu_pd(mins + i);
    _mm256_storeu_pd(mins + i, _mm256_min_pd(acc, m));
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

}  // namespace carbo::simd::avx2
