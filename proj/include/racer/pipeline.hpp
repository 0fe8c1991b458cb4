#pragma once

#include <vector>

#include "racer/calibration.hpp"
#include "racer/dataset.hpp"
#include "racer/scoring.hpp"

namespace racer {

struct ScoredQuery {
  AugmentedScoreRow augmented;
  NonconformityRow nonconformity;
};

/// augment -> nonconformity -> (optional) smooth for one record.
ScoredQuery score_record(const QueryRecord& record, const ScorePipeline& pipeline);

struct ScoredDataset {
  std::vector<AugmentedScoreRow> augmented;
  std::vector<NonconformityRow> rows;
};

ScoredDataset score_dataset(const RoutingDataset& dataset, const ScorePipeline& pipeline);

std::vector<GroundTruth> ground_truth(const RoutingDataset& dataset);

/// Scores, computes critical scores and calibrates on `cal` in one step.
CalibrationResult calibrate_dataset(const RoutingDataset& cal, double alpha, const ScorePipeline& pipeline);

/// Smoothing seed a command or trial derives from its master seed.
std::uint64_t smoothing_seed_for(std::uint64_t seed);

}  // namespace racer
