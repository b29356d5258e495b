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

#include <atomic>
#include <cstdlib>
#include <string>

namespace carbo::simd {

namespace {

bool cpu_has_avx2() {
#if defined(CARBO_HAVE_AVX2_TU) && (defined(__GNUC__) || defined(__clang__))
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

bool cpu_has_neon() {
#if defined(CARBO_HAVE_NEON_TU)
  return true;  // mandatory on aarch64
#else
  return false;
#endif
}

Level initial_level() {
  Level level = detected_level();
  if (const char* env = std::getenv("CARBO_SIMD")) {
    const std::string want(env);
    if (want == "scalar") level = Level::kScalar;
  }
  return level;
}

std::atomic<Level>& current() {
  static std::atomic<Level> level{initial_level()};
  return level;
}

}  // namespace

std::string_view level_name(Level level) {
  switch (level) {
    case Level::kScalar: return "scalar";
    case Level::kAvx2: return "avx2";
    case Level::kNeon: return "neon";
  }
  return "unknown";
}

bool level_available(Level level) {
  switch (level) {
    case Level::kScalar: return true;
    case Level::kAvx2: return cpu_has_avx2();
    case Level::kNeon: return cpu_has_neon();
  }
  return false;
}

Level detected_level() {
  static const Level level = [] {
    if (cpu_has_avx2()) return Level::kAvx2;
    if (cpu_has_neon()) return Level::kNeon;
    return Level::kScalar;
  }();
  return level;
}

Level active_level() { return current().load(std::memory_order_relaxed); }

bool set_active_level(Level level) {
  if (!level_available(level)) return false;
  current().store(level, std::memory_order_relaxed);
  return true;
}

void sq_dist_to_many(const double* query, std::size_t dim, const double* points,
                     std::size_t n, std::size_t ld, double* out) {
  switch (active_level()) {
#if defined(CARBO_HAVE_AVX2_TU)
    case Level::kAvx2:
      avx2::sq_dist_to_many(query, dim, points, n, ld, out);
      return;
#endif
#if defined(CARBO_HAVE_NEON_TU)
    case Level::kNeon:
      neon::sq_dist_to_many(query, dim, points, n, ld, out);
      return;
#endif
    default:
      scalar::sq_dist_to_many(query, dim, points, n, ld, out);
  }
}

void min_sq_dist_update(const double* query, std::size_t dim,
                        const double* points, std::size_t n, std::size_t ld,
                        double* mins) {
  switch (active_level()) {
#if defined(CARBO_HAVE_AVX2_TU)
    case Level::kAvx2:
      avx2::min_sq_dist_update(query, dim, points, n, ld, mins);
      return;
#endif
#if defined(CARBO_HAVE_NEON_TU)
    case Level::kNeon:
      neon::min_sq_dist_update(query, dim, points, n, ld, mins);
      return;
#endif
    default:
      scalar::min_sq_dist_update(query, dim, points, n, ld, mins);
  }
}

}  // namespace carbo::simd
