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

#include "carbo/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <boost/random/sobol.hpp>

#include "carbo/errors.hpp"
#include "carbo/rng.hpp"

namespace carbo {

std::string_view to_string(DimensionKind kind) {
  switch (kind) {
    case DimensionKind::kContinuous: return "continuous";
    case DimensionKind::kLogContinuous: return "log-continuous";
    case DimensionKind::kInteger: return "integer";
    case DimensionKind::kCategorical: return "categorical";
  }
  return "unknown";
}

DimensionKind parse_dimension_kind(std::string_view text) {
  if (text == "continuous") return DimensionKind::kContinuous;
  if (text == "log-continuous") return DimensionKind::kLogContinuous;
  if (text == "integer") return DimensionKind::kInteger;
  if (text == "categorical") return DimensionKind::kCategorical;
  throw SchemaError("unknown dimension kind '" + std::string(text) + "'");
}

Dimension::Dimension(std::string name, DimensionKind kind, double lo, double hi,
                     std::vector<std::string> categories)
    : name_(std::move(name)),
      kind_(kind),
      lo_(lo),
      hi_(hi),
      categories_(std::move(categories)) {
  if (name_.empty()) throw SchemaError("dimension name must not be empty");
  switch (kind_) {
    case DimensionKind::kContinuous:
    case DimensionKind::kInteger:
      if (!(std::isfinite(lo_) && std::isfinite(hi_) && lo_ < hi_)) {
        throw DomainError("dimension '" + name_ + "': need lo < hi");
      }
      break;
    case DimensionKind::kLogContinuous:
      if (!(std::isfinite(lo_) && std::isfinite(hi_) && lo_ > 0.0 &&
            lo_ < hi_)) {
        throw DomainError("dimension '" + name_ + "': need 0 < lo < hi");
      }
      break;
    case DimensionKind::kCategorical: {
      std::set<std::string> unique(categories_.begin(), categories_.end());
      if (categories_.size() < 2 || unique.size() != categories_.size()) {
        throw DomainError("dimension '" + name_ +
                          "': need at least 2 distinct categories");
      }
      break;
    }
  }
}

Dimension Dimension::continuous(std::string name, double lo, double hi) {
  return Dimension(std::move(name), DimensionKind::kContinuous, lo, hi, {});
}

Dimension Dimension::log_continuous(std::string name, double lo, double hi) {
  return Dimension(std::move(name), DimensionKind::kLogContinuous, lo, hi, {});
}

Dimension Dimension::integer(std::string name, std::int64_t lo,
                             std::int64_t hi) {
  return Dimension(std::move(name), DimensionKind::kInteger,
                   static_cast<double>(lo), static_cast<double>(hi), {});
}

Dimension Dimension::categorical(std::string name,
                                 std::vector<std::string> categories) {
  return Dimension(std::move(name), DimensionKind::kCategorical, 0.0, 1.0,
                   std::move(categories));
}

SearchSpace::SearchSpace(std::vector<Dimension> dims) : dims_(std::move(dims)) {
  if (dims_.empty()) throw SchemaError("search space has no dimensions");
  std::set<std::string> names;
  for (const auto& d : dims_) {
    if (!names.insert(d.name()).second) {
      throw SchemaError("duplicate dimension name '" + d.name() + "'");
    }
    offsets_.push_back(encoded_dim_);
    encoded_dim_ += d.width();
    if (d.kind() != DimensionKind::kContinuous &&
        d.kind() != DimensionKind::kLogContinuous) {
      all_continuous_ = false;
    }
  }
}

const Dimension* SearchSpace::find(std::string_view name) const {
  for (const auto& d : dims_) {
    if (d.name() == name) return &d;
  }
  return nullptr;
}

namespace {

double numeric_value(const Dimension& dim, const ParamValue& v) {
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) {
    return static_cast<double>(*i);
  }
  throw SchemaError("dimension '" + dim.name() +
                    "': expected a number, got a string");
}

double clamp01(double c) { return std::clamp(c, 0.0, 1.0); }

}  // namespace

Point SearchSpace::encode(const RawParams& raw) const {
  Point p;
  p.encoded = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(encoded_dim_));
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const Dimension& dim = dims_[i];
    const auto it = raw.find(dim.name());
    if (it == raw.end()) {
      throw SchemaError("missing value for dimension '" + dim.name() + "'");
    }
    const auto off = static_cast<Eigen::Index>(offsets_[i]);
    switch (dim.kind()) {
      case DimensionKind::kContinuous: {
        const double v = numeric_value(dim, it->second);
        if (!std::isfinite(v) || v < dim.lo() || v > dim.hi()) {
          throw DomainError("dimension '" + dim.name() + "': value out of bounds");
        }
        p.encoded[off] = clamp01((v - dim.lo()) / (dim.hi() - dim.lo()));
        p.raw[dim.name()] = v;
        break;
      }
      case DimensionKind::kLogContinuous: {
        const double v = numeric_value(dim, it->second);
        if (!std::isfinite(v) || v < dim.lo() || v > dim.hi()) {
          throw DomainError("dimension '" + dim.name() + "': value out of bounds");
        }
        const double llo = std::log(dim.lo());
        p.encoded[off] = clamp01((std::log(v) - llo) / (std::log(dim.hi()) - llo));
        p.raw[dim.name()] = v;
        break;
      }
      case DimensionKind::kInteger: {
        const double v = numeric_value(dim, it->second);
        if (!std::isfinite(v) || v != std::floor(v)) {
          throw DomainError("dimension '" + dim.name() + "': value is not an integer");
        }
        if (v < dim.lo() || v > dim.hi()) {
          throw DomainError("dimension '" + dim.name() + "': value out of bounds");
        }
        p.encoded[off] = (v - dim.lo()) / (dim.hi() - dim.lo());
        p.raw[dim.name()] = static_cast<std::int64_t>(v);
        break;
      }
      case DimensionKind::kCategorical: {
        const auto* label = std::get_if<std::string>(&it->second);
        if (label == nullptr) {
          throw SchemaError("dimension '" + dim.name() + "': expected a category label");
        }
        const auto& cats = dim.categories();
        const auto pos = std::find(cats.begin(), cats.end(), *label);
        if (pos == cats.end()) {
          throw DomainError("dimension '" + dim.name() + "': unknown category '" +
                            *label + "'");
        }
        p.encoded[off + (pos - cats.begin())] = 1.0;
        p.raw[dim.name()] = *label;
        break;
      }
    }
  }
  return p;
}

RawParams SearchSpace::decode(std::span<const double> encoded) const {
  if (encoded.size() != encoded_dim_) {
    throw SchemaError("encoded point has " + std::to_string(encoded.size()) +
                      " coordinates, expected " + std::to_string(encoded_dim_));
  }
  RawParams raw;
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const Dimension& dim = dims_[i];
    const std::size_t off = offsets_[i];
    switch (dim.kind()) {
      case DimensionKind::kContinuous: {
        const double c = clamp01(encoded[off]);
        raw[dim.name()] =
            std::clamp(dim.lo() + c * (dim.hi() - dim.lo()), dim.lo(), dim.hi());
        break;
      }
      case DimensionKind::kLogContinuous: {
        const double c = clamp01(encoded[off]);
        const double llo = std::log(dim.lo());
        const double v = std::exp(llo + c * (std::log(dim.hi()) - llo));
        raw[dim.name()] = std::clamp(v, dim.lo(), dim.hi());
        break;
      }
      case DimensionKind::kInteger: {
        const double c = clamp01(encoded[off]);
        const double v = std::floor(dim.lo() + c * (dim.hi() - dim.lo()) + 0.5);
        raw[dim.name()] =
            static_cast<std::int64_t>(std::clamp(v, dim.lo(), dim.hi()));
        break;
      }
      case DimensionKind::kCategorical: {
        std::size_t best = 0;
        for (std::size_t k = 1; k < dim.width(); ++k) {
          if (encoded[off + k] > encoded[off + best]) best = k;
        }
        raw[dim.name()] = dim.categories()[best];
        break;
      }
    }
  }
  return raw;
}

Eigen::VectorXd SearchSpace::snap(std::span<const double> encoded) const {
  if (encoded.size() != encoded_dim_) {
    throw SchemaError("encoded point has " + std::to_string(encoded.size()) +
                      " coordinates, expected " + std::to_string(encoded_dim_));
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(encoded_dim_));
  for (std::size_t i = 0; i < dims_.size(); ++i) {
    const Dimension& dim = dims_[i];
    const std::size_t off = offsets_[i];
    const auto eoff = static_cast<Eigen::Index>(off);
    switch (dim.kind()) {
      case DimensionKind::kContinuous:
      case DimensionKind::kLogContinuous:
        out[eoff] = clamp01(encoded[off]);
        break;
      case DimensionKind::kInteger: {
        const double span = dim.hi() - dim.lo();
        const double v = std::clamp(
            std::floor(dim.lo() + clamp01(encoded[off]) * span + 0.5), dim.lo(),
            dim.hi());
        out[eoff] = (v - dim.lo()) / span;
        break;
      }
      case DimensionKind::kCategorical: {
        std::size_t best = 0;
        for (std::size_t k = 1; k < dim.width(); ++k) {
          if (encoded[off + k] > encoded[off + best]) best = k;
        }
        for (std::size_t k = 0; k < dim.width(); ++k) {
          out[eoff + static_cast<Eigen::Index>(k)] = k == best ? 1.0 : 0.0;
        }
        break;
      }
    }
  }
  return out;
}

Point SearchSpace::point_at(std::span<const double> encoded) const {
  Point p;
  p.encoded = snap(encoded);
  p.raw = decode(as_span(p.encoded));
  return p;
}

std::vector<Point> sample_uniform(const SearchSpace& space, std::size_t n,
                                  std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Point> out;
  out.reserve(n);
  Eigen::VectorXd x(static_cast<Eigen::Index>(space.encoded_dim()));
  for (std::size_t i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = uniform01(rng);
    out.push_back(space.point_at(as_span(x)));
  }
  return out;
}

std::string_view to_string(CandidateGenerator generator) {
  return generator == CandidateGenerator::kSobol ? "sobol" : "uniform";
}

Eigen::MatrixXd sobol_points(std::size_t dim, std::size_t n) {
  if (dim == 0) throw ArgumentError("sobol_points: dimension must be >= 1");
  boost::random::sobol engine(static_cast<unsigned>(dim));
  Eigen::MatrixXd pts(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  // The engine emits 64-bit integers coordinate by coordinate and already
  // starts after the origin.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < dim; ++k) {
      pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          static_cast<double>(engine()) * 0x1.0p-64;
    }
  }
  return pts;
}

std::size_t default_candidate_count(const SearchSpace& space) {
  return std::max<std::size_t>(512, 100 * space.encoded_dim());
}

CandidateSet discretize(const SearchSpace& space, std::size_t size,
                        CandidateGenerator generator, std::uint64_t seed) {
  if (size < 2) throw ArgumentError("discretize: size must be >= 2");
  const std::size_t dim = space.encoded_dim();
  CandidateSet out;
  out.generator = generator;
  out.seed = seed;
  out.points.resize(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(dim));

  std::set<std::vector<double>> seen;
  std::size_t filled = 0;
  const std::size_t max_draws = 64 * size + 1024;

  auto accept = [&](const Eigen::VectorXd& raw) {
    const Eigen::VectorXd s = space.snap(as_span(raw));
    std::vector<double> key(s.data(), s.data() + s.size());
    if (!seen.insert(std::move(key)).second) return;
    out.points.row(static_cast<Eigen::Index>(filled++)) = s.transpose();
  };

  if (generator == CandidateGenerator::kSobol) {
    boost::random::sobol engine(static_cast<unsigned>(dim));
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    for (std::size_t draws = 0; filled < size && draws < max_draws; ++draws) {
      for (Eigen::Index k = 0; k < x.size(); ++k) {
        x[k] = static_cast<double>(engine()) * 0x1.0p-64;
      }
      accept(x);
    }
  } else {
    Rng rng(seed);
    Eigen::VectorXd x(static_cast<Eigen::Index>(dim));
    for (std::size_t draws = 0; filled < size && draws < max_draws; ++draws) {
      for (Eigen::Index k = 0; k < x.size(); ++k) x[k] = uniform01(rng);
      accept(x);
    }
  }
  if (filled < size) {
    throw ArgumentError("discretize: could not find " + std::to_string(size) +
                        " distinct points in the search space");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Config documents

namespace {

[[noreturn]] void field_error(std::string_view source, const std::string& dim,
                              std::string_view field, const std::string& what) {
  std::ostringstream os;
  os << source << ": dimension " << dim << " field '" << field << "': " << what;
  throw SchemaError(os.str());
}

}  // namespace

SearchSpace parse_search_space(const nlohmann::json& doc,
                               std::string_view source) {
  const nlohmann::json* list = &doc;
  if (doc.is_object()) {
    if (!doc.contains("dimensions")) {
      throw SchemaError(std::string(source) + ": missing 'dimensions' list");
    }
    list = &doc.at("dimensions");
  }
  if (!list->is_array() || list->empty()) {
    throw SchemaError(std::string(source) + ": 'dimensions' must be a non-empty list");
  }
  std::vector<Dimension> dims;
  std::size_t index = 0;
  for (const auto& entry : *list) {
    std::string label = "#" + std::to_string(index++);
    if (!entry.is_object()) field_error(source, label, "", "expected an object");
    if (!entry.contains("name") || !entry["name"].is_string()) {
      field_error(source, label, "name", "missing or not a string");
    }
    const std::string name = entry["name"].get<std::string>();
    label = "'" + name + "'";
    if (!entry.contains("kind") || !entry["kind"].is_string()) {
      field_error(source, label, "kind", "missing or not a string");
    }
    DimensionKind kind;
    try {
      kind = parse_dimension_kind(entry["kind"].get<std::string>());
    } catch (const SchemaError& e) {
      field_error(source, label, "kind", e.what());
    }
    try {
      if (kind == DimensionKind::kCategorical) {
        if (!entry.contains("categories") || !entry["categories"].is_array()) {
          field_error(source, label, "categories", "missing or not a list");
        }
        std::vector<std::string> cats;
        for (const auto& c : entry["categories"]) {
          if (!c.is_string()) {
            field_error(source, label, "categories", "labels must be strings");
          }
          cats.push_back(c.get<std::string>());
        }
        try {
          dims.push_back(Dimension::categorical(name, std::move(cats)));
        } catch (const Error& e) {
          field_error(source, label, "categories", e.what());
        }
        continue;
      }
      const auto& b = entry.contains("bounds") ? entry["bounds"] : nlohmann::json();
      if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
        field_error(source, label, "bounds", "expected [lo, hi]");
      }
      try {
        if (kind == DimensionKind::kInteger) {
          if (!b[0].is_number_integer() || !b[1].is_number_integer()) {
            field_error(source, label, "bounds", "integer bounds must be integers");
          }
          dims.push_back(Dimension::integer(name, b[0].get<std::int64_t>(),
                                            b[1].get<std::int64_t>()));
        } else if (kind == DimensionKind::kLogContinuous) {
          dims.push_back(Dimension::log_continuous(name, b[0].get<double>(),
                                                   b[1].get<double>()));
        } else {
          dims.push_back(Dimension::continuous(name, b[0].get<double>(),
                                               b[1].get<double>()));
        }
      } catch (const DomainError& e) {
        field_error(source, label, "bounds", e.what());
      }
    } catch (const nlohmann::json::exception& e) {
      field_error(source, label, "", e.what());
    }
  }
  try {
    return SearchSpace(std::move(dims));
  } catch (const SchemaError& e) {
    throw SchemaError(std::string(source) + ": " + e.what());
  }
}

SearchSpace load_search_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path.string() + ": cannot open file");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return parse_search_space(doc, path.string());
}

nlohmann::json to_json(const SearchSpace& space) {
  nlohmann::json dims = nlohmann::json::array();
  for (const auto& d : space.dims()) {
    nlohmann::json e{{"name", d.name()}, {"kind", to_string(d.kind())}};
    if (d.kind() == DimensionKind::kCategorical) {
      e["categories"] = d.categories();
    } else if (d.kind() == DimensionKind::kInteger) {
      e["bounds"] = {static_cast<std::int64_t>(d.lo()),
                     static_cast<std::int64_t>(d.hi())};
    } else {
      e["bounds"] = {d.lo(), d.hi()};
    }
    dims.push_back(std::move(e));
  }
  return nlohmann::json{{"dimensions", std::move(dims)}};
}

nlohmann::json to_json(const RawParams& raw) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [name, value] : raw) {
    std::visit([&, &key = name](const auto& v) { out[key] = v; }, value);
  }
  return out;
}

RawParams raw_params_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw SchemaError("parameter document must be an object");
  RawParams raw;
  for (const auto& [name, value] : doc.items()) {
    if (value.is_number_integer()) {
      raw[name] = value.get<std::int64_t>();
    } else if (value.is_number()) {
      raw[name] = value.get<double>();
    } else if (value.is_string()) {
      raw[name] = value.get<std::string>();
    } else {
      throw SchemaError("parameter '" + name + "' has unsupported type");
    }
  }
  return raw;
}

}  // namespace carbo
