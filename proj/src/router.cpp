#include "racer/router.hpp"

#include <algorithm>

#include "racer/error.hpp"

namespace racer {

std::vector<std::size_t> PredictionSet::real_members() const {
  std::vector<std::size_t> out;
  for (auto m : members)
    if (m < pool_size) out.push_back(m);
  return out;
}

std::size_t PredictionSet::real_size() const {
  return static_cast<std::size_t>(std::count_if(members.begin(), members.end(),
                                                [this](std::size_t m) { return m < pool_size; }));
}

bool PredictionSet::contains(std::size_t index) const {
  return std::binary_search(members.begin(), members.end(), index);
}

PredictionSet threshold_set(const NonconformityRow& row, double lambda) {
  PredictionSet set;
  set.query_id = row.query_id;
  set.pool_size = row.pool_size();
  set.lambda_used = lambda;
  for (std::size_t m = 0; m < row.s.size(); ++m)
    if (row.s[m] <= lambda) set.members.push_back(m);
  set.abstain = set.real_size() == 0;
  return set;
}

PredictionSet predict_set(const NonconformityRow& row, const CalibrationResult& calib) {
  if (row.kind != calib.kind)
    throw Error(ErrorCode::KindMismatch, row.query_id + ": row scored with '" + std::string(to_string(row.kind)) +
                                             "' but calibration used '" + std::string(to_string(calib.kind)) + "'");
  if (row.smoothing_seed != calib.smoothing_seed)
    throw Error(ErrorCode::SmoothingMismatch,
                row.query_id + ": row smoothing does not match the calibration's smoothing seed");
  return threshold_set(row, calib.lambda_hat);
}

std::vector<PredictionSet> route_batch(std::span<const NonconformityRow> rows, const CalibrationResult& calib) {
  std::vector<PredictionSet> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(predict_set(row, calib));
  return out;
}

bool misses(const PredictionSet& set, std::span<const std::size_t> ground_truth) {
  if (ground_truth.empty()) return !set.contains_null();
  return std::none_of(ground_truth.begin(), ground_truth.end(), [&](std::size_t m) { return set.contains(m); });
}

PredictionSet full_pool_set(std::string query_id, std::size_t pool_size) {
  PredictionSet set;
  set.query_id = std::move(query_id);
  set.pool_size = pool_size;
  for (std::size_t m = 0; m < pool_size; ++m) set.members.push_back(m);
  set.abstain = pool_size == 0;
  set.lambda_used = 0.0;
  return set;
}

std::vector<std::string> member_names(const PredictionSet& set, const ModelPool& pool) {
  std::vector<std::string> names;
  for (auto m : set.members) names.push_back(pool.name(m));
  return names;
}

}  // namespace racer
