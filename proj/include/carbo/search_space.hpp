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

// The optimization domain. Mixed-type hyperparameters are encoded into the
// unit cube [0,1]^encoded_dim; every distance in the library is Euclidean in
// that cube.
//
//   continuous      [lo, hi]        affine onto [0, 1]
//   log-continuous  [lo, hi], lo>0  log-affine onto [0, 1]
//   integer         {lo, ..., hi}   affine, rounded half-up on decode
//   categorical     labels          one-hot block, argmax on decode

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace carbo {

enum class DimensionKind { kContinuous, kLogContinuous, kInteger, kCategorical };

std::string_view to_string(DimensionKind kind);
DimensionKind parse_dimension_kind(std::string_view text);

using ParamValue = std::variant<double, std::int64_t, std::string>;
using RawParams = std::map<std::string, ParamValue>;

class Dimension {
 public:
  static Dimension continuous(std::string name, double lo, double hi);
  static Dimension log_continuous(std::string name, double lo, double hi);
  static Dimension integer(std::string name, std::int64_t lo, std::int64_t hi);
  static Dimension categorical(std::string name,
                               std::vector<std::string> categories);

  const std::string& name() const { return name_; }
  DimensionKind kind() const { return kind_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::vector<std::string>& categories() const { return categories_; }

  // Number of encoded coordinates this dimension occupies.
  std::size_t width() const {
    return kind_ == DimensionKind::kCategorical ? categories_.size() : 1;
  }

 private:
  Dimension(std::string name, DimensionKind kind, double lo, double hi,
            std::vector<std::string> categories);

  std::string name_;
  DimensionKind kind_;
  double lo_ = 0.0;
  double hi_ = 1.0;
  std::vector<std::string> categories_;
};

struct Point {
  Eigen::VectorXd encoded;
  RawParams raw;
};

class SearchSpace {
 public:
  SearchSpace() = default;
  explicit SearchSpace(std::vector<Dimension> dims);

  const std::vector<Dimension>& dims() const { return dims_; }
  std::size_t encoded_dim() const { return encoded_dim_; }
  // First encoded coordinate of dimension i.
  std::size_t offset(std::size_t i) const { return offsets_[i]; }
  const Dimension* find(std::string_view name) const;

  Point encode(const RawParams& raw) const;
  RawParams decode(std::span<const double> encoded) const;

  // encode(decode(x)): the canonical encoding of the configuration x denotes.
  Eigen::VectorXd snap(std::span<const double> encoded) const;
  Point point_at(std::span<const double> encoded) const;

  bool all_continuous() const { return all_continuous_; }

 private:
  std::vector<Dimension> dims_;
  std::vector<std::size_t> offsets_;
  std::size_t encoded_dim_ = 0;
  bool all_continuous_ = true;
};

inline std::span<const double> as_span(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

// n points drawn i.i.d. uniformly in the encoded cube (then snapped).
std::vector<Point> sample_uniform(const SearchSpace& space, std::size_t n,
                                  std::uint64_t seed);

enum class CandidateGenerator { kSobol, kUniform };

std::string_view to_string(CandidateGenerator generator);

// The discretization of the domain used by the initial design and the
// acquisition maximizer. Rows are encoded points; storage is column-major so
// the SIMD distance kernels can stream each coordinate.
struct CandidateSet {
  Eigen::MatrixXd points;
  CandidateGenerator generator = CandidateGenerator::kSobol;
  std::uint64_t seed = 0;

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  Eigen::VectorXd row(std::size_t i) const {
    return points.row(static_cast<Eigen::Index>(i)).transpose();
  }
};

// First n points of the unscrambled Sobol sequence in `dim` dimensions,
// skipping the origin.
Eigen::MatrixXd sobol_points(std::size_t dim, std::size_t n);

// `size` distinct snapped points. Sobol points are deterministic; `seed` only
// affects the uniform generator.
CandidateSet discretize(const SearchSpace& space, std::size_t size,
                        CandidateGenerator generator, std::uint64_t seed);

std::size_t default_candidate_count(const SearchSpace& space);

// Config document support. Errors name the source, the dimension and the
// offending field.
SearchSpace parse_search_space(const nlohmann::json& doc,
                               std::string_view source = "<config>");
SearchSpace load_search_space(const std::filesystem::path& path);
nlohmann::json to_json(const SearchSpace& space);

nlohmann::json to_json(const RawParams& raw);
RawParams raw_params_from_json(const nlohmann::json& doc);

}  // namespace carbo
