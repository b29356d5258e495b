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

#include "carbo/batch_fantasy.hpp"

#include <algorithm>
#include <string>

#include "carbo/errors.hpp"
#include "carbo/rng.hpp"

namespace carbo {

namespace {

bool contains(const std::vector<Point>& batch, const Eigen::VectorXd& x) {
  return std::any_of(batch.begin(), batch.end(),
                     [&](const Point& p) { return p.encoded == x; });
}

}  // namespace

double fantasy_acquisition(const FantasySet& set, const CostModel& cost,
                           double alpha, std::span<const double> p) {
  double sum = 0.0;
  if (set.shared_covariance && set.size() > 1) {
    thread_local std::vector<Prediction> preds;
    preds.resize(set.size());
    set.surrogates.front().predict_siblings(p, set.surrogates, preds);
    for (std::size_t i = 0; i < set.size(); ++i) {
      sum += expected_improvement(preds[i].mean, preds[i].variance, set.incumbents[i]);
    }
  } else {
    for (std::size_t i = 0; i < set.size(); ++i) {
      const Prediction pred = set.surrogates[i].predict(p);
      sum += expected_improvement(pred.mean, pred.variance, set.incumbents[i]);
    }
  }
  const double ei = sum / static_cast<double>(set.size());
  return alpha == 0.0 ? ei : ei_cool(ei, cost.predict(p), alpha);
}

BatchProposal propose_batch(const GpSurrogate& g, const CostModel& cost,
                            double alpha, std::size_t b,
                            const SearchSpace& space, std::uint64_t seed,
                            const BatchOptions& options) {
  if (b < 1) throw ArgumentError("propose_batch: batch size must be >= 1");
  if (options.n_fantasies < 1) {
    throw ArgumentError("propose_batch: n_fantasies must be >= 1");
  }
  if (g.size() == 0) throw ArgumentError("propose_batch: surrogate has no data");
  if (g.dim() != space.encoded_dim()) {
    throw SchemaError("propose_batch: surrogate and space dimensions differ");
  }

  BatchProposal out;
  const double incumbent = g.train_y().minCoeff();
  FantasySet real;
  real.surrogates.push_back(g);
  real.incumbents.push_back(incumbent);

  FantasySet& fant = out.fantasies;
  for (std::size_t j = 0; j < b; ++j) {
    if (j == 1) {
      fant.surrogates.assign(options.n_fantasies, g);
      fant.incumbents.assign(options.n_fantasies, incumbent);
    }
    if (j >= 1) {
      const Eigen::VectorXd& prev = out.points.back().encoded;
      const auto prev_span = as_span(prev);
      for (std::size_t i = 0; i < fant.size(); ++i) {
        GpSurrogate& s = fant.surrogates[i];
        const double y = options.draw == FantasyDraw::kSample
                             ? s.sample_posterior(prev_span, derive_seed(seed, 1000 + j, i))
                             : s.predict(prev_span).mean;
        s = s.condition_on(prev_span, y);
        fant.incumbents[i] = std::min(fant.incumbents[i], y);
      }
      fant.shared_covariance = std::all_of(
          fant.surrogates.begin() + 1, fant.surrogates.end(),
          [&](const GpSurrogate& s) { return fant.surrogates.front().shares_covariance(s); });
    }
    const FantasySet& active = j == 0 ? real : fant;
    const AcquisitionFn acq = [&](std::span<const double> p) {
      return fantasy_acquisition(active, cost, alpha, p);
    };

    AcquisitionMaximum best;
    bool distinct = false;
    for (int attempt = 0; attempt <= options.duplicate_retries; ++attempt) {
      best = maximize_acquisition(acq, space, derive_seed(seed, j, attempt),
                                  options.maximizer);
      if (!contains(out.points, best.point)) {
        distinct = true;
        break;
      }
    }
    if (!distinct) {
      ++out.accepted_duplicates;
      log_warning("propose_batch: accepting duplicate proposal at batch position " +
                  std::to_string(j) + " after " +
                  std::to_string(options.duplicate_retries) + " retries");
    }
    out.points.push_back(space.point_at(as_span(best.point)));
  }
  return out;
}

}  // namespace carbo
