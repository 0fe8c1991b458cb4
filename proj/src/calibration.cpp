#include "racer/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "racer/error.hpp"

namespace racer {

std::vector<CriticalScore> critical_scores(std::span<const NonconformityRow> rows,
                                           std::span<const GroundTruth> ground_truth) {
  std::unordered_map<std::string_view, const NonconformityRow*> by_id;
  by_id.reserve(rows.size());
  for (const auto& row : rows) by_id.emplace(row.query_id, &row);

  std::vector<CriticalScore> out;
  out.reserve(ground_truth.size());
  for (const auto& gt : ground_truth) {
    auto it = by_id.find(gt.query_id);
    if (it == by_id.end())
      throw Error(ErrorCode::MissingRow, "no non-conformity row for query '" + gt.query_id + "'");
    const auto& s = it->second->s;
    if (s.size() < 2) throw Error(ErrorCode::InvalidScore, gt.query_id + ": non-conformity row too short");
    const std::size_t null_index = s.size() - 1;

    CriticalScore cs{gt.query_id, 0.0, gt.correct.empty()};
    if (cs.gt_was_empty) {
      cs.s_min = s[null_index];
    } else {
      cs.s_min = s.at(gt.correct.front());
      for (auto m : gt.correct) {
        if (m >= null_index)
          throw Error(ErrorCode::InvalidParameter, gt.query_id + ": ground-truth index out of range");
        cs.s_min = std::min(cs.s_min, s[m]);
      }
    }
    out.push_back(std::move(cs));
  }
  return out;
}

bool risk_bound_holds(std::size_t exceedances, std::size_t n, double alpha) {
  return (1.0 + static_cast<double>(exceedances)) / (static_cast<double>(n) + 1.0) <= alpha;
}

std::size_t allowed_exceedances(std::size_t n, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error(ErrorCode::InvalidParameter, "alpha must lie in (0,1)");
  if (!risk_bound_holds(0, n, alpha)) throw AlphaInfeasibleError(alpha, n);
  // Closed-form guess, then settle on the exact predicate to avoid rounding drift.
  double guess = std::floor(alpha * (static_cast<double>(n) + 1.0)) - 1.0;
  std::size_t k = static_cast<std::size_t>(std::clamp(guess, 0.0, static_cast<double>(n)));
  while (k > 0 && !risk_bound_holds(k, n, alpha)) --k;
  while (k < n && risk_bound_holds(k + 1, n, alpha)) ++k;
  return k;
}

CalibrationResult calibrate(std::span<const CriticalScore> criticals, double alpha, const ScorePipeline& pipeline) {
  const std::size_t n = criticals.size();
  if (n == 0) throw Error(ErrorCode::EmptyCalibration, "no calibration queries");
  const std::size_t k = allowed_exceedances(n, alpha);

  std::vector<double> sorted;
  sorted.reserve(n);
  for (const auto& c : criticals) {
    if (std::isnan(c.s_min)) throw Error(ErrorCode::InvalidScore, c.query_id + ": NaN critical score");
    sorted.push_back(c.s_min);
  }
  std::sort(sorted.begin(), sorted.end());

  // #{s_i > lambda} <= k  <=>  lambda >= s_(n-k) (1-based order statistic).
  double lambda = k >= n ? 0.0 : sorted[n - k - 1];
  if (k >= n) lambda = std::min(0.0, sorted.front());

  const auto exceed = static_cast<std::size_t>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), lambda));
  return {lambda, alpha, n, pipeline.kind, pipeline.smoothing_seed, exceed};
}

}  // namespace racer
