#pragma once

#include <span>
#include <string>
#include <vector>

#include "racer/calibration.hpp"
#include "racer/dataset.hpp"
#include "racer/scoring.hpp"

namespace racer {

/// C(x) = {m in M' : s(x, m) <= lambda}. Members are augmented-pool indices in
/// ascending order; index `pool_size` is the null model.
struct PredictionSet {
  std::string query_id;
  std::vector<std::size_t> members;
  std::size_t pool_size = 0;
  bool abstain = true;
  double lambda_used = 0.0;

  /// Members that are real models (null model excluded).
  std::vector<std::size_t> real_members() const;
  std::size_t real_size() const;
  bool contains(std::size_t index) const;
  bool contains_null() const { return contains(pool_size); }
};

/// Inclusive threshold rule with no pipeline checks.
PredictionSet threshold_set(const NonconformityRow& row, double lambda);

/// Throws KindMismatch / SmoothingMismatch when the row was not produced by
/// the calibration's score pipeline.
PredictionSet predict_set(const NonconformityRow& row, const CalibrationResult& calib);

/// Elementwise predict_set; errors name the failing query.
std::vector<PredictionSet> route_batch(std::span<const NonconformityRow> rows, const CalibrationResult& calib);

/// 1{C ∩ G' = ∅}, with G' = {null} when G is empty.
bool misses(const PredictionSet& set, std::span<const std::size_t> ground_truth);

/// Set for every real model (no routing), used for the full-ensemble baseline.
PredictionSet full_pool_set(std::string query_id, std::size_t pool_size);

/// Names of the members, null model reported under pool.null_id().
std::vector<std::string> member_names(const PredictionSet& set, const ModelPool& pool);

}  // namespace racer
