#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace racer {

enum class ScoreKind { Gap, Prob };

std::string_view to_string(ScoreKind kind);
ScoreKind parse_score_kind(std::string_view text);

/// Router scores over the augmented pool: pool order, then the null model last.
struct AugmentedScoreRow {
  std::string query_id;
  std::vector<double> r;

  std::size_t pool_size() const noexcept { return r.size() - 1; }
  double null_score() const { return r.back(); }
};

/// Non-conformity scores over the augmented pool; lower means more confident.
struct NonconformityRow {
  std::string query_id;
  std::vector<double> s;
  ScoreKind kind = ScoreKind::Gap;
  std::optional<std::uint64_t> smoothing_seed;  // set once smoothed

  bool smoothed() const noexcept { return smoothing_seed.has_value(); }
  std::size_t pool_size() const noexcept { return s.size() - 1; }
};

/// Upper bound (exclusive) of the smoothing noise.
inline constexpr double kSmoothingWidth = 1e-6;

/// Appends the null-model score 1 - max_k f(x, k).
AugmentedScoreRow augment(std::string query_id, std::span<const double> scores);

/// gap: s = max over the augmented pool of r, minus r.  prob: s = 1 - r.
NonconformityRow nonconformity(const AugmentedScoreRow& row, ScoreKind kind);

/// Noise in [0, kSmoothingWidth) for one entry, keyed by (seed, query, index).
double smoothing_noise(std::uint64_t seed, std::string_view query_id, std::size_t index);

NonconformityRow smooth(NonconformityRow row, std::uint64_t seed);

}  // namespace racer
