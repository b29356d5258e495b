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

#include <doctest.h>

#include <array>
#include <cmath>
#include <vector>

#include "carbo/errors.hpp"
#include "carbo/problems.hpp"
#include "carbo/rng.hpp"

using namespace carbo;

namespace {

std::span<const double> sp(const Eigen::VectorXd& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

std::vector<Point> random_points(const SearchSpace& space, std::size_t n, std::uint64_t seed) {
  return sample_uniform(space, n, seed);
}

}  // namespace

TEST_CASE("branin minimum") {
  CHECK(std::abs(branin(M_PI, 2.275) - 0.39789) < 1e-4);
  CHECK(std::abs(branin(-M_PI, 12.275) - 0.39789) < 1e-4);
  CHECK(std::abs(branin(3 * M_PI, 2.475) - 0.39789) < 1e-4);
  const auto p = SyntheticProblem::make("branin", CostField::kConstant);
  CHECK(std::abs(p.optimum_value() - 0.39789) < 1e-4);
  CHECK(p.minimizers().rows() == 3);
  // Encoded minimizer maps back to the raw one.
  const Eigen::VectorXd m = p.minimizers().row(1).transpose();
  CHECK(p.objective(sp(m)) == doctest::Approx(branin(M_PI, 2.275)));
  // Nothing on a fine grid beats the recorded optimum.
  double lowest = 1e300;
  for (int i = 0; i <= 300; ++i) {
    for (int j = 0; j <= 300; ++j) {
      lowest = std::min(lowest, branin(-5.0 + 15.0 * i / 300.0, 15.0 * j / 300.0));
    }
  }
  CHECK(lowest >= p.optimum_value() - 1e-9);
}

TEST_CASE("hartmann and rastrigin minima") {
  const auto h3 = SyntheticProblem::make("hartmann3", CostField::kConstant);
  CHECK(std::abs(h3.optimum_value() - (-3.86278)) < 1e-4);
  const auto h6 = SyntheticProblem::make("hartmann6", CostField::kConstant);
  CHECK(std::abs(h6.optimum_value() - (-3.32237)) < 1e-4);
  const auto r = SyntheticProblem::make("rastrigin-2d", CostField::kConstant);
  CHECK(r.optimum_value() == doctest::Approx(0.0).scale(1.0));
  const std::array<double, 2> off{1.0, 0.0};
  CHECK(rastrigin(off) == doctest::Approx(1.0));

  // Random points never beat the stored minimum.
  for (const auto* p : {&h3, &h6, &r}) {
    for (const auto& x : random_points(p->space(), 2000, 5)) {
      CHECK(p->objective(sp(x.encoded)) >= p->optimum_value() - 1e-9);
    }
  }
}

TEST_CASE("cost fields span one order of magnitude") {
  for (const std::string name : {"branin", "hartmann3", "rastrigin-2d"}) {
    const auto cheap = SyntheticProblem::make(name, CostField::kCheapOptimum);
    const auto dear = SyntheticProblem::make(name, CostField::kExpensiveOptimum);
    for (Eigen::Index i = 0; i < cheap.minimizers().rows(); ++i) {
      const Eigen::VectorXd m = cheap.minimizers().row(i).transpose();
      CHECK(cheap.cost(sp(m)) == doctest::Approx(1.0).epsilon(1e-12));
      CHECK(dear.cost(sp(m)) == doctest::Approx(10.0).epsilon(1e-12));
    }
    double hi = 0.0;
    for (const auto& x : random_points(cheap.space(), 4000, 9)) {
      const double c = cheap.cost(sp(x.encoded));
      const double e = dear.cost(sp(x.encoded));
      CHECK(c >= 1.0);
      CHECK(c <= 10.0);
      CHECK(c * e == doctest::Approx(10.0));
      hi = std::max(hi, c);
    }
    CHECK(hi > 7.0);
    const auto flat = SyntheticProblem::make(name, CostField::kConstant);
    CHECK(flat.cost(sp(cheap.minimizers().row(0).transpose())) == 1.0);
  }
}

TEST_CASE("cheap-optimum cost reaches ten at the farthest point") {
  // Brute force the farthest point from the branin minimizers on a grid.
  const auto p = SyntheticProblem::make("branin", CostField::kCheapOptimum);
  double far = 0.0;
  Eigen::Vector2d arg;
  for (int i = 0; i <= 400; ++i) {
    for (int j = 0; j <= 400; ++j) {
      const Eigen::Vector2d x(i / 400.0, j / 400.0);
      double d = 1e300;
      for (Eigen::Index k = 0; k < 3; ++k) {
        d = std::min(d, (x - p.minimizers().row(k).transpose()).norm());
      }
      if (d > far) {
        far = d;
        arg = x;
      }
    }
  }
  CHECK(p.cost(sp(arg)) == doctest::Approx(10.0).epsilon(1e-3));
}

TEST_CASE("mlp-sim flop field") {
  const auto p = SyntheticProblem::make("mlp-sim", CostField::kFlops);
  REQUIRE(p.features());
  const auto& space = p.space();
  RawParams small{{"h1", std::int64_t{16}}, {"h2", std::int64_t{16}}, {"learning_rate", 1e-3}};
  RawParams large{{"h1", std::int64_t{1024}}, {"h2", std::int64_t{1024}}, {"learning_rate", 1e-3}};
  const auto ps = space.encode(small);
  const auto pl = space.encode(large);
  CHECK(p.cost(sp(ps.encoded)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(p.cost(sp(pl.encoded)) == doctest::Approx(10.0).epsilon(1e-12));

  RawParams mid{{"h1", std::int64_t{100}}, {"h2", std::int64_t{300}}, {"learning_rate", 0.01}};
  const auto pm = space.encode(mid);
  const auto f = p.features()(sp(pm.encoded));
  CHECK(f.quad == 784.0 * 100 + 100.0 * 300 + 300.0 * 10);
  CHECK(f.linear == 784.0 + 100 + 300 + 10);

  // Cost is affine in quad + 5 linear between the two extremes.
  auto raw = [](double h1, double h2) {
    return 784 * h1 + h1 * h2 + h2 * 10 + 5 * (784 + h1 + h2 + 10);
  };
  const double t = (raw(100, 300) - raw(16, 16)) / (raw(1024, 1024) - raw(16, 16));
  CHECK(p.cost(sp(pm.encoded)) == doctest::Approx(1.0 + 9.0 * t).epsilon(1e-12));

  // Objective is branin over (learning-rate, mean-width) coordinates.
  const Eigen::VectorXd m = p.minimizers().row(0).transpose();
  CHECK(p.objective(sp(m)) == doctest::Approx(branin(-M_PI, 12.275)).epsilon(1e-12));
  CHECK(std::abs(p.optimum_value() - 0.39789) < 1e-4);
}

TEST_CASE("problem construction errors") {
  CHECK_THROWS_AS(SyntheticProblem::make("nope", CostField::kConstant), ConfigError);
  CHECK_THROWS_AS(SyntheticProblem::make("branin", CostField::kFlops), ConfigError);
  CHECK_THROWS_AS(SyntheticProblem::make("branin", CostField::kConstant, -1.0), ConfigError);
  CHECK_THROWS_AS(parse_cost_field("warm"), ConfigError);
  CHECK(parse_cost_field("expensive-optimum") == CostField::kExpensiveOptimum);
  for (const auto& name : synthetic_objective_names()) {
    CHECK_NOTHROW(SyntheticProblem::make(name, CostField::kCheapOptimum));
  }
  const auto p = SyntheticProblem::make("branin", CostField::kConstant);
  const std::vector<double> three{0.1, 0.2, 0.3};
  CHECK_THROWS_AS(p.objective(three), SchemaError);
}

TEST_CASE("simulated clock") {
  SimulatedEvaluator ev(SyntheticProblem::make("hartmann3", CostField::kCheapOptimum));
  const auto& prob = ev.problem();
  Rng rng(4);
  double total = 0.0, elapsed = 0.0;
  std::size_t count = 0;
  for (int round = 0; round < 30; ++round) {
    const std::size_t b = 1 + round % 4;
    const auto pts = sample_uniform(prob.space(), b, 100 + round);
    std::vector<std::uint64_t> seeds(b, 1);
    const auto res = ev.evaluate_batch(pts, seeds);
    double mx = 0.0;
    for (std::size_t j = 0; j < b; ++j) {
      const double c = prob.cost(sp(pts[j].encoded));
      CHECK(res[j].cost == c);
      CHECK(*res[j].objective == prob.objective(sp(pts[j].encoded)));
      total += c;
      mx = std::max(mx, c);
    }
    elapsed += mx;
    count += b;
  }
  CHECK(std::abs(ev.total_cost() - total) < 1e-9);
  CHECK(std::abs(ev.elapsed() - elapsed) < 1e-9);
  CHECK(ev.evaluations() == count);
}

TEST_CASE("simulated noise is seeded") {
  SimulatedEvaluator ev(SyntheticProblem::make("branin", CostField::kConstant, 0.5));
  const auto pts = sample_uniform(ev.problem().space(), 1, 3);
  const double f = ev.problem().objective(sp(pts[0].encoded));
  double s = 0.0, s2 = 0.0;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    const std::vector<std::uint64_t> seed{static_cast<std::uint64_t>(i)};
    const double e = *ev.evaluate_batch(pts, seed)[0].objective - f;
    s += e;
    s2 += e * e;
  }
  CHECK(std::abs(s / n) < 4.0 * 0.5 / std::sqrt(n));
  CHECK(std::sqrt(s2 / n) == doctest::Approx(0.5).epsilon(0.05));
  const std::vector<std::uint64_t> same{42};
  CHECK(*ev.evaluate_batch(pts, same)[0].objective == *ev.evaluate_batch(pts, same)[0].objective);
  CHECK_THROWS_AS(ev.evaluate_batch(pts, std::vector<std::uint64_t>{}), ArgumentError);
}
