#include "racer/pipeline.hpp"

#include "racer/rng.hpp"

namespace racer {

ScoredQuery score_record(const QueryRecord& record, const ScorePipeline& pipeline) {
  ScoredQuery q{augment(record.id, record.scores), {}};
  q.nonconformity = nonconformity(q.augmented, pipeline.kind);
  if (pipeline.smoothing_seed) q.nonconformity = smooth(std::move(q.nonconformity), *pipeline.smoothing_seed);
  return q;
}

ScoredDataset score_dataset(const RoutingDataset& dataset, const ScorePipeline& pipeline) {
  ScoredDataset out;
  out.augmented.reserve(dataset.size());
  out.rows.reserve(dataset.size());
  for (const auto& rec : dataset.records) {
    auto q = score_record(rec, pipeline);
    out.augmented.push_back(std::move(q.augmented));
    out.rows.push_back(std::move(q.nonconformity));
  }
  return out;
}

std::vector<GroundTruth> ground_truth(const RoutingDataset& dataset) {
  std::vector<GroundTruth> out;
  out.reserve(dataset.size());
  for (const auto& rec : dataset.records) out.push_back({rec.id, rec.correct});
  return out;
}

CalibrationResult calibrate_dataset(const RoutingDataset& cal, double alpha, const ScorePipeline& pipeline) {
  const auto scored = score_dataset(cal, pipeline);
  const auto gt = ground_truth(cal);
  const auto criticals = critical_scores(scored.rows, gt);
  return calibrate(criticals, alpha, pipeline);
}

std::uint64_t smoothing_seed_for(std::uint64_t seed) { return rng::derive_seed(seed, "smooth"); }

}  // namespace racer
