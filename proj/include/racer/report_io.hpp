#pragma once

#include <string>
#include <vector>

#include "racer/aggregation.hpp"
#include "racer/calibration.hpp"
#include "racer/evaluation.hpp"
#include "racer/json_io.hpp"
#include "racer/router.hpp"

namespace racer::report_io {

using json_io::json;

json to_json(const CalibrationResult& calib);
CalibrationResult calibration_from_json(const json& j);

json to_json(const AggregationConfig& config);
AggregationConfig aggregation_from_json(const json& j);

/// {"abstain": b, "id": s, "members": [s]}
json to_json(const PredictionSet& set, const ModelPool& pool);
PredictionSet prediction_set_from_json(const json& j, const ModelPool& pool);

/// {"abstain": b, "answer": s|null, "id": s, "tie_broken": b, "votes": {s: f}}
json to_json(const AggregateOutcome& outcome);
AggregateOutcome outcome_from_json(const json& j);

json to_json(const MetricsReport& m);
json to_json(const TrialReport& r);
json to_json(const EnsembleComparison& c);
json to_json(const ConfigSelection& s);

/// Header plus one data row.
std::string metrics_csv(const MetricsReport& m);
/// One row per trial.
std::string trials_csv(const TrialReport& r);
/// One row per (kind, alpha) cell.
std::string sweep_csv(const std::vector<TrialReport>& table);
std::string comparison_csv(const EnsembleComparison& c);

/// Parses a JSONL stream into one json value per non-blank line.
std::vector<json> parse_json_lines(const std::string& text);

}  // namespace racer::report_io
