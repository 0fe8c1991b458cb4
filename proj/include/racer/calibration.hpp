#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "racer/scoring.hpp"

namespace racer {

/// G(x) for one query as pool indices; empty means no model answers correctly.
struct GroundTruth {
  std::string query_id;
  std::vector<std::size_t> correct;
};

/// Minimum non-conformity score over the augmented ground truth set G'.
struct CriticalScore {
  std::string query_id;
  double s_min = 0.0;
  bool gt_was_empty = false;
};

/// Identifies the score pipeline a threshold was calibrated under. Test rows
/// must come from the same pipeline.
struct ScorePipeline {
  ScoreKind kind = ScoreKind::Gap;
  std::optional<std::uint64_t> smoothing_seed;
};

struct CalibrationResult {
  double lambda_hat = 0.0;
  double alpha = 0.0;
  std::size_t n = 0;
  ScoreKind kind = ScoreKind::Gap;
  std::optional<std::uint64_t> smoothing_seed;
  std::size_t empirical_exceedances = 0;

  ScorePipeline pipeline() const { return {kind, smoothing_seed}; }
};

/// G' = G when non-empty, else {null model}; s_min is the minimum of s over G'.
/// Throws MissingRow when a ground-truth query has no score row.
std::vector<CriticalScore> critical_scores(std::span<const NonconformityRow> rows,
                                           std::span<const GroundTruth> ground_truth);

/// The finite-sample feasibility rule (1 + exceedances) / (n + 1) <= alpha.
bool risk_bound_holds(std::size_t exceedances, std::size_t n, double alpha);

/// Largest exceedance count allowed at alpha; throws AlphaInfeasible below 1/(n+1).
std::size_t allowed_exceedances(std::size_t n, double alpha);

/// Smallest lambda in {0} ∪ {s_i} with (1 + #{s_i > lambda}) / (n + 1) <= alpha.
/// Deterministic; performs no randomization of its own.
CalibrationResult calibrate(std::span<const CriticalScore> criticals, double alpha,
                            const ScorePipeline& pipeline = {});

}  // namespace racer
