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

#include "carbo/initial_design.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carbo/errors.hpp"
#include "carbo/rng.hpp"
#include "carbo/simd/distance.hpp"

namespace carbo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd rows_of(std::span<const Eigen::VectorXd> pts) {
  if (pts.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(pts.size()), pts.front().size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  }
  return m;
}

}  // namespace

std::vector<Eigen::VectorXd> Design::points() const {
  std::vector<Eigen::VectorXd> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.point.encoded);
  return out;
}

double fill(const Eigen::MatrixXd& design, const CandidateSet& proxy) {
  if (proxy.size() == 0) throw StateError("fill: empty proxy set");
  if (design.rows() == 0) return kInf;
  Eigen::VectorXd mins = Eigen::VectorXd::Constant(proxy.points.rows(), kInf);
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    const Eigen::VectorXd q = design.row(i).transpose();
    simd::min_sq_dist_update(q, proxy.points, mins);
  }
  return std::sqrt(mins.maxCoeff());
}

double fill(std::span<const Eigen::VectorXd> design, const CandidateSet& proxy) {
  return fill(rows_of(design), proxy);
}

std::size_t eliminate_to_one(std::span<const double> costs,
                             std::span<const double> dists) {
  const std::size_t n = costs.size();
  if (n == 0) throw StateError("select_next: no candidates left");
  if (dists.size() != n) throw ArgumentError("eliminate_to_one: size mismatch");
  const bool empty_design =
      std::none_of(dists.begin(), dists.end(), [](double d) { return std::isfinite(d); });

  std::vector<std::size_t> by_cost(n), by_dist(n);
  std::iota(by_cost.begin(), by_cost.end(), 0);
  std::iota(by_dist.begin(), by_dist.end(), 0);
  std::sort(by_cost.begin(), by_cost.end(), [&](std::size_t a, std::size_t b) {
    if (costs[a] != costs[b]) return costs[a] > costs[b];
    if (dists[a] != dists[b]) return dists[a] < dists[b];
    return a > b;
  });
  std::sort(by_dist.begin(), by_dist.end(), [&](std::size_t a, std::size_t b) {
    if (dists[a] != dists[b]) return dists[a] < dists[b];
    if (costs[a] != costs[b]) return costs[a] > costs[b];
    return a > b;
  });

  std::vector<char> removed(n, 0);
  std::size_t alive = n;
  std::size_t pc = 0;
  std::size_t pd = 0;
  auto drop_next = [&](const std::vector<std::size_t>& order, std::size_t& pos) {
    while (removed[order[pos]]) ++pos;
    removed[order[pos]] = 1;
    --alive;
  };
  while (alive > 1) {
    drop_next(by_cost, pc);
    if (alive > 1 && !empty_design) drop_next(by_dist, pd);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!removed[i]) return i;
  }
  return 0;  // unreachable
}

std::size_t select_next_index(const CandidateSet& candidates,
                              std::span<const Eigen::VectorXd> design,
                              const CostModel& cost) {
  const std::size_t n = candidates.size();
  if (n == 0) throw StateError("select_next: empty candidate set");
  std::vector<double> costs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Eigen::VectorXd row = candidates.row(i);
    costs[i] = cost.predict(as_span(row));
  }
  Eigen::VectorXd mins = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), kInf);
  for (const auto& p : design) simd::min_sq_dist_update(p, candidates.points, mins);
  return eliminate_to_one(costs, std::span<const double>(mins.data(), n));
}

Point select_next(const CandidateSet& candidates, const Design& current,
                  const CostModel& cost, const SearchSpace& space) {
  const auto pts = current.points();
  const std::size_t idx = select_next_index(candidates, pts, cost);
  const Eigen::VectorXd row = candidates.row(idx);
  return space.point_at(as_span(row));
}

Design build_design(const SearchSpace& space,
                    const CostSurrogateFactory& cost_factory, double tau_init,
                    std::size_t batch, Evaluator& evaluator, std::uint64_t seed,
                    const DesignOptions& options) {
  if (!(tau_init > 0.0)) throw ArgumentError("build_design: tau_init must be positive");
  if (batch < 1) throw ArgumentError("build_design: batch must be >= 1");

  const CandidateSet pool =
      options.pool ? *options.pool
                   : discretize(space,
                                options.pool_size ? options.pool_size
                                                  : default_candidate_count(space),
                                CandidateGenerator::kSobol, derive_seed(seed, 1));
  const std::size_t n = pool.size();
  std::vector<CostSample> samples = options.prior_costs;
  std::shared_ptr<const CostModel> cost =
      cost_factory(samples, derive_seed(seed, 2, 0));

  Eigen::VectorXd mins = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), kInf);
  std::vector<std::size_t> alive(n);
  std::iota(alive.begin(), alive.end(), 0);

  Design design;
  std::vector<double> pred(n);
  std::vector<double> alive_costs;
  std::vector<double> alive_dists;

  while (design.elapsed < tau_init && !alive.empty()) {
    const std::size_t round = design.rounds;
    for (std::size_t i : alive) {
      const Eigen::VectorXd row = pool.row(i);
      pred[i] = cost->predict(as_span(row));
    }

    std::vector<Point> picks;
    for (std::size_t j = 0; j < batch && !alive.empty(); ++j) {
      alive_costs.resize(alive.size());
      alive_dists.resize(alive.size());
      for (std::size_t a = 0; a < alive.size(); ++a) {
        alive_costs[a] = pred[alive[a]];
        alive_dists[a] = mins[static_cast<Eigen::Index>(alive[a])];
      }
      const std::size_t pos = eliminate_to_one(alive_costs, alive_dists);
      const std::size_t chosen = alive[pos];
      alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(pos));
      const Eigen::VectorXd row = pool.row(chosen);
      simd::min_sq_dist_update(row, pool.points, mins);
      picks.push_back(space.point_at(as_span(row)));
    }

    std::vector<std::uint64_t> seeds(picks.size());
    for (std::size_t j = 0; j < picks.size(); ++j) seeds[j] = derive_seed(seed, 3 + round, j);
    const std::vector<EvalResult> results = evaluator.evaluate_batch(picks, seeds);

    design.elapsed_before_round.push_back(design.elapsed);
    double round_max = 0.0;
    for (std::size_t j = 0; j < picks.size(); ++j) {
      const EvalResult& r = results[j];
      design.entries.push_back({picks[j], r.objective, r.cost, round, r.error});
      design.total_cost += r.cost;
      round_max = std::max(round_max, r.cost);
      if (r.cost > 0.0 && std::isfinite(r.cost)) samples.push_back({picks[j].encoded, r.cost});
    }
    design.elapsed += round_max;
    design.fill_after_round.push_back(std::sqrt(mins.maxCoeff()));
    ++design.rounds;
    cost = cost_factory(samples, derive_seed(seed, 2, design.rounds));
  }
  design.fill = design.entries.empty() ? kInf : std::sqrt(mins.maxCoeff());
  return design;
}

}  // namespace carbo
