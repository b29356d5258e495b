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

#include "carbo/simd/distance.hpp"

#include <algorithm>

namespace carbo::simd::scalar {

void sq_dist_to_many(const double* query, std::size_t dim, const double* points,
                     std::size_t n, std::size_t ld, double* out) {
  std::fill(out, out + n, 0.0);
  for (std::size_t k = 0; k < dim; ++k) {
    const double q = query[k];
    const double* col = points + k * ld;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = col[i] - q;
      out[i] = out[i] + diff * diff;
    }
  }
}

void min_sq_dist_update(const double* query, std::size_t dim,
                        const double* points, std::size_t n, std::size_t ld,
                        double* mins) {
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t k = 0; k < dim; ++k) {
      const double diff = points[k * ld + i] - query[k];
      acc = acc + diff * diff;
    }
    mins[i] = std::min(mins[i], acc);
  }
}

}  // namespace carbo::simd::scalar
