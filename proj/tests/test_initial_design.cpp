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

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <vector>

#include "carbo/errors.hpp"
#include "carbo/initial_design.hpp"
#include "carbo/rng.hpp"

using namespace carbo;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SearchSpace unit_square() {
  return SearchSpace({Dimension::continuous("x", 0.0, 1.0),
                      Dimension::continuous("y", 0.0, 1.0)});
}

CandidateSet make_set(const std::vector<std::array<double, 2>>& pts) {
  CandidateSet c;
  c.points.resize(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    c.points(static_cast<Eigen::Index>(i), 0) = pts[i][0];
    c.points(static_cast<Eigen::Index>(i), 1) = pts[i][1];
  }
  return c;
}

CandidateSet random_set(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  CandidateSet c;
  c.points.resize(static_cast<Eigen::Index>(n), 2);
  for (Eigen::Index i = 0; i < c.points.rows(); ++i) {
    c.points(i, 0) = uniform01(rng);
    c.points(i, 1) = uniform01(rng);
  }
  return c;
}

// Cost-free greedy farthest-point sequence: start at index 0, then the
// candidate farthest from the chosen set, lowest index on ties.
std::vector<std::size_t> greedy_maximin(const CandidateSet& c, std::size_t k) {
  std::vector<std::size_t> chosen{0};
  while (chosen.size() < k) {
    std::size_t best = 0;
    double best_d = -1.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (std::find(chosen.begin(), chosen.end(), i) != chosen.end()) continue;
      double d = kInf;
      for (std::size_t j : chosen) d = std::min(d, (c.row(i) - c.row(j)).norm());
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    chosen.push_back(best);
  }
  return chosen;
}

double fill_oracle(const std::vector<Eigen::VectorXd>& design, const CandidateSet& proxy) {
  double worst = 0.0;
  for (std::size_t i = 0; i < proxy.size(); ++i) {
    double d = kInf;
    for (const auto& x : design) d = std::min(d, (proxy.row(i) - x).norm());
    worst = std::max(worst, d);
  }
  return worst;
}

std::shared_ptr<const CostModel> constant_model(std::span<const CostSample>, std::uint64_t) {
  return std::make_shared<ConstantCost>(1.0);
}

// Deterministic evaluator with a cost field over the encoded cube.
class FieldEvaluator final : public Evaluator {
 public:
  explicit FieldEvaluator(std::function<double(const Eigen::VectorXd&)> cost,
                          std::function<bool(std::size_t)> fails = {})
      : cost_(std::move(cost)), fails_(std::move(fails)) {}

  std::vector<EvalResult> evaluate_batch(std::span<const Point> points,
                                         std::span<const std::uint64_t>) override {
    std::vector<EvalResult> out;
    for (const auto& p : points) {
      EvalResult r;
      r.cost = cost_(p.encoded);
      if (fails_ && fails_(calls_)) {
        r.error = "injected failure";
      } else {
        r.objective = p.encoded.sum();
      }
      ++calls_;
      out.push_back(r);
    }
    batches.push_back(points.size());
    return out;
  }

  std::vector<std::size_t> batches;

 private:
  std::function<double(const Eigen::VectorXd&)> cost_;
  std::function<bool(std::size_t)> fails_;
  std::size_t calls_ = 0;
};

std::size_t index_of(const CandidateSet& c, const Eigen::VectorXd& p) {
  for (std::size_t i = 0; i < c.size(); ++i) {
    if ((c.row(i) - p).norm() == 0.0) return i;
  }
  return c.size();
}

}  // namespace

TEST_CASE("fill worked examples") {
  const auto proxy = make_set({{0, 0}, {1, 0}, {0, 1}, {1, 1}, {0.5, 0.5}});
  const std::vector<Eigen::VectorXd> center{Eigen::Vector2d(0.5, 0.5)};
  CHECK(fill(center, proxy) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  const std::vector<Eigen::VectorXd> corners{
      Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1),
      Eigen::Vector2d(1, 1)};
  CHECK(fill(corners, proxy) == doctest::Approx(std::sqrt(0.5)).epsilon(1e-12));

  CHECK(fill(proxy.points, proxy) == 0.0);
  CHECK(fill(std::span<const Eigen::VectorXd>{}, proxy) == kInf);
  CHECK_THROWS_AS(fill(center, CandidateSet{}), StateError);
}

TEST_CASE("fill matches a direct oracle") {
  const auto proxy = random_set(300, 4);
  Rng rng(5);
  std::vector<Eigen::VectorXd> design;
  for (int k = 0; k < 7; ++k) {
    design.push_back(Eigen::Vector2d(uniform01(rng), uniform01(rng)));
    CHECK(fill(design, proxy) == doctest::Approx(fill_oracle(design, proxy)).epsilon(1e-12));
  }
}

TEST_CASE("elimination worked examples") {
  // Empty design: cost elimination only, cheapest survives.
  const std::vector<double> c3{3.0, 1.0, 2.0};
  const std::vector<double> none(3, kInf);
  CHECK(eliminate_to_one(c3, none) == 1);

  // Two candidates at equal distance: the expensive one goes first.
  const std::vector<double> c2{5.0, 1.0};
  const std::vector<double> d2{0.25, 0.25};
  CHECK(eliminate_to_one(c2, d2) == 1);

  // Cost then distance: drop cost 9 (idx 2), then nearest (idx 0).
  const std::vector<double> c4{1.0, 2.0, 9.0, 3.0};
  const std::vector<double> d4{0.01, 0.5, 0.9, 0.4};
  // Remaining {1, 3}: cost drops idx 3, survivor idx 1.
  CHECK(eliminate_to_one(c4, d4) == 1);

  // Cost ties drop the closer candidate; distance ties drop the pricier one.
  const std::vector<double> ct{2.0, 2.0, 1.0};
  const std::vector<double> dt{0.3, 0.2, 0.1};
  // Drop idx 1 (tie, closer), then nearest idx 2; idx 0 remains.
  CHECK(eliminate_to_one(ct, dt) == 0);

  CHECK(eliminate_to_one(std::vector<double>{4.0}, std::vector<double>{0.0}) == 0);
  CHECK_THROWS_AS(eliminate_to_one({}, {}), StateError);
}

TEST_CASE("select_next with an empty design returns the cheapest candidate") {
  const auto c = make_set({{0.1, 0.1}, {0.5, 0.5}, {0.9, 0.9}});
  struct Lookup final : CostModel {
    double predict(std::span<const double> p) const override {
      if (p[0] < 0.2) return 3.0;
      if (p[0] < 0.6) return 1.0;
      return 2.0;
    }
    std::string_view kind() const override { return "lookup"; }
  } cost;
  CHECK(select_next_index(c, {}, cost) == 1);
  const Point p = select_next(c, Design{}, cost, unit_square());
  CHECK(p.encoded.isApprox(Eigen::Vector2d(0.5, 0.5)));
  CHECK_THROWS_AS(select_next_index(CandidateSet{}, {}, cost), StateError);
}

TEST_CASE("constant cost selection is greedy maximin") {
  const auto c = random_set(50, 42);
  const ConstantCost cost(1.0);
  const auto oracle = greedy_maximin(c, 12);
  std::vector<Eigen::VectorXd> design;
  CandidateSet remaining = c;
  std::vector<std::size_t> remaining_index(c.size());
  std::iota(remaining_index.begin(), remaining_index.end(), 0);
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    const std::size_t pos = select_next_index(remaining, design, cost);
    const std::size_t idx = remaining_index[pos];
    CHECK(idx == oracle[k]);
    design.push_back(c.row(idx));
    // Drop the selected row from the remaining candidates.
    Eigen::MatrixXd next(remaining.points.rows() - 1, 2);
    for (Eigen::Index r = 0, w = 0; r < remaining.points.rows(); ++r) {
      if (static_cast<std::size_t>(r) == pos) continue;
      next.row(w++) = remaining.points.row(r);
    }
    remaining.points = next;
    remaining_index.erase(remaining_index.begin() + static_cast<std::ptrdiff_t>(pos));
  }
}

TEST_CASE("build_design under constant cost reproduces greedy maximin") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto pool = random_set(60, 100 + seed);
    FieldEvaluator ev([](const Eigen::VectorXd&) { return 1.0; });
    DesignOptions opt;
    opt.pool = pool;
    const Design d = build_design(unit_square(), constant_model, 10.0, 1, ev, seed, opt);
    REQUIRE(d.entries.size() == 10);
    const auto oracle = greedy_maximin(pool, 10);
    for (std::size_t k = 0; k < 10; ++k) {
      CHECK(index_of(pool, d.entries[k].point.encoded) == oracle[k]);
    }
  }
}

TEST_CASE("constant cost with eight units of budget gives eight points") {
  const auto pool = random_set(12, 77);
  FieldEvaluator ev([](const Eigen::VectorXd&) { return 1.0; });
  DesignOptions opt;
  opt.pool = pool;
  const Design d = build_design(unit_square(), constant_model, 8.0, 1, ev, 3, opt);
  REQUIRE(d.entries.size() == 8);
  CHECK(d.total_cost == 8.0);

  // Exhaustive optimum over all 8-subsets of the 12 candidates.
  double best = kInf;
  for (unsigned mask = 0; mask < (1u << 12); ++mask) {
    if (__builtin_popcount(mask) != 8) continue;
    std::vector<Eigen::VectorXd> sub;
    for (std::size_t i = 0; i < 12; ++i) {
      if (mask & (1u << i)) sub.push_back(pool.row(i));
    }
    best = std::min(best, fill_oracle(sub, pool));
  }
  CHECK(fill_oracle(d.points(), pool) <= 2.0 * best + 1e-12);
  CHECK(d.fill == doctest::Approx(fill_oracle(d.points(), pool)).epsilon(1e-12));
}

TEST_CASE("a budget below the cheapest cost still evaluates one point") {
  FieldEvaluator ev([](const Eigen::VectorXd&) { return 5.0; });
  DesignOptions opt;
  opt.pool_size = 64;
  const Design d = build_design(unit_square(), constant_model, 0.5, 1, ev, 1, opt);
  CHECK(d.entries.size() == 1);
  CHECK(d.total_cost == 5.0);
}

TEST_CASE("design budget, monotone fill and distinct points") {
  auto cost_fn = [](const Eigen::VectorXd& x) { return std::pow(10.0, x[0]); };
  for (std::size_t b : {1u, 3u}) {
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
      FieldEvaluator ev(cost_fn);
      DesignOptions opt;
      opt.pool_size = 256;
      const Design d = build_design(unit_square(), make_cost_factory(CostModelKind::kWarpedGp),
                                    20.0, b, ev, seed, opt);
      REQUIRE(d.rounds >= 1);
      CHECK(d.elapsed_before_round.back() < 20.0);
      CHECK(d.elapsed >= 20.0);
      for (std::size_t r = 1; r < d.fill_after_round.size(); ++r) {
        CHECK(d.fill_after_round[r] <= d.fill_after_round[r - 1]);
      }
      std::set<std::vector<double>> seen;
      for (const auto& e : d.entries) {
        seen.insert({e.point.encoded[0], e.point.encoded[1]});
      }
      CHECK(seen.size() == d.entries.size());
      for (std::size_t s : ev.batches) CHECK(s == b);
      // The clock advances by each round's largest cost.
      double elapsed = 0.0, total = 0.0;
      for (std::size_t r = 0; r < d.rounds; ++r) {
        double mx = 0.0;
        for (const auto& e : d.entries) {
          if (e.round == r) mx = std::max(mx, e.cost);
        }
        CHECK(d.elapsed_before_round[r] == doctest::Approx(elapsed));
        elapsed += mx;
      }
      for (const auto& e : d.entries) total += e.cost;
      CHECK(d.elapsed == doctest::Approx(elapsed));
      CHECK(d.total_cost == doctest::Approx(total));
    }
  }
}

TEST_CASE("failed evaluations still consume budget") {
  FieldEvaluator ev([](const Eigen::VectorXd&) { return 1.0; },
                    [](std::size_t i) { return i % 2 == 1; });
  DesignOptions opt;
  opt.pool_size = 64;
  const Design d = build_design(unit_square(), make_cost_factory(CostModelKind::kWarpedGp),
                                6.0, 1, ev, 2, opt);
  CHECK(d.entries.size() == 6);
  CHECK(d.total_cost == 6.0);
  std::size_t failed = 0;
  for (const auto& e : d.entries) {
    if (!e.objective) {
      ++failed;
      CHECK(e.error == "injected failure");
    }
  }
  CHECK(failed == 3);
}

TEST_CASE("cheap-region designs are cheap and spread out") {
  // Cost 1 on the left half, 10 on the right.
  auto cost_fn = [](const Eigen::VectorXd& x) { return x[0] < 0.5 ? 1.0 : 10.0; };
  const double tau_init = 30.0;
  const auto proxy = random_set(2000, 999);
  std::vector<double> design_fill, random_fill;
  std::size_t cheap = 0, total = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    FieldEvaluator ev(cost_fn);
    // Cost data from a five-point uniform warm start, as in a full run.
    DesignOptions opt;
    for (const auto& p : sample_uniform(unit_square(), 5, derive_seed(seed, 5))) {
      opt.prior_costs.push_back({p.encoded, cost_fn(p.encoded)});
    }
    const Design d = build_design(unit_square(), make_cost_factory(CostModelKind::kWarpedGp),
                                  tau_init, 1, ev, seed, opt);
    for (const auto& e : d.entries) {
      ++total;
      if (e.point.encoded[0] < 0.5) ++cheap;
    }
    design_fill.push_back(fill_oracle(d.points(), proxy));

    // Uniform points until the same budget is spent.
    Rng rng(derive_seed(seed, 77));
    std::vector<Eigen::VectorXd> rnd;
    double spent = 0.0;
    while (spent < tau_init) {
      rnd.push_back(Eigen::Vector2d(uniform01(rng), uniform01(rng)));
      spent += cost_fn(rnd.back());
    }
    random_fill.push_back(fill_oracle(rnd, proxy));
  }
  auto med = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[(v.size() - 1) / 2] + v[v.size() / 2]);
  };
  CHECK(static_cast<double>(cheap) >= 0.7 * static_cast<double>(total));
  CHECK(med(design_fill) < med(random_fill));
}

TEST_CASE("argument errors") {
  FieldEvaluator ev([](const Eigen::VectorXd&) { return 1.0; });
  CHECK_THROWS_AS(build_design(unit_square(), constant_model, 0.0, 1, ev, 0), ArgumentError);
  CHECK_THROWS_AS(build_design(unit_square(), constant_model, 1.0, 0, ev, 0), ArgumentError);
}
