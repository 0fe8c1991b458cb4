#include "racer/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "racer/error.hpp"
#include "racer/rng.hpp"

namespace racer {

std::string_view to_string(ScoreKind kind) { return kind == ScoreKind::Gap ? "gap" : "prob"; }

ScoreKind parse_score_kind(std::string_view text) {
  if (text == "gap") return ScoreKind::Gap;
  if (text == "prob") return ScoreKind::Prob;
  throw Error(ErrorCode::InvalidParameter, "unknown score kind '" + std::string(text) + "' (expected gap|prob)");
}

AugmentedScoreRow augment(std::string query_id, std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::InvalidScore, query_id + ": empty score vector");
  for (double f : scores)
    if (!std::isfinite(f) || f < 0.0 || f > 1.0)
      throw Error(ErrorCode::InvalidScore, query_id + ": base score outside [0,1]");
  AugmentedScoreRow row{std::move(query_id), {scores.begin(), scores.end()}};
  row.r.push_back(1.0 - *std::max_element(scores.begin(), scores.end()));
  return row;
}

NonconformityRow nonconformity(const AugmentedScoreRow& row, ScoreKind kind) {
  if (row.r.size() < 2) throw Error(ErrorCode::InvalidScore, row.query_id + ": augmented row too short");
  for (double v : row.r)
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw Error(ErrorCode::InvalidScore, row.query_id + ": augmented score outside [0,1]");

  NonconformityRow out{row.query_id, {}, kind, std::nullopt};
  out.s.reserve(row.r.size());
  if (kind == ScoreKind::Gap) {
    const double top = *std::max_element(row.r.begin(), row.r.end());
    for (double v : row.r) out.s.push_back(top - v);
  } else {
    for (double v : row.r) out.s.push_back(1.0 - v);
  }
  return out;
}

double smoothing_noise(std::uint64_t seed, std::string_view query_id, std::size_t index) {
  const double u = rng::to_unit(rng::key(seed, rng::hash_string(query_id), index));
  const double eps = u * kSmoothingWidth;
  return eps < kSmoothingWidth ? eps : std::nextafter(kSmoothingWidth, 0.0);
}

NonconformityRow smooth(NonconformityRow row, std::uint64_t seed) {
  if (row.smoothed()) throw Error(ErrorCode::AlreadySmoothed, row.query_id + ": row is already smoothed");
  for (std::size_t m = 0; m < row.s.size(); ++m) row.s[m] += smoothing_noise(seed, row.query_id, m);
  row.smoothing_seed = seed;
  return row;
}

}  // namespace racer
