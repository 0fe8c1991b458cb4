#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "racer/calibration.hpp"
#include "racer/dataset.hpp"
#include "racer/router.hpp"
#include "racer/scoring.hpp"

namespace racer {

enum class AggregationMethod { Majority, Weighted };

/// Where per-model weights come from: the router score r(x, m) or a
/// precomputed confidence column of the dataset.
struct WeightScheme {
  std::optional<std::string> confidence;  // nullopt selects the router score

  static WeightScheme router_score() { return {}; }
  static WeightScheme from_confidence(std::string scheme) { return {std::move(scheme)}; }
  static WeightScheme parse(const std::string& text);  // "router_score" | "confidence:<name>"
  std::string to_string() const;

  bool operator==(const WeightScheme&) const = default;
};

struct AggregationConfig {
  AggregationMethod method = AggregationMethod::Majority;
  WeightScheme weight_scheme;
  std::optional<double> temperature;  // weighted only; unset means "tune on validation"

  static AggregationConfig majority() { return {}; }
  static AggregationConfig weighted(WeightScheme scheme, std::optional<double> temperature = std::nullopt) {
    return {AggregationMethod::Weighted, std::move(scheme), temperature};
  }
  /// "majority" | "weighted:router_score" | "weighted:confidence:<name>", optional "@T" suffix.
  static AggregationConfig parse(const std::string& text);
  std::string to_string() const;

  /// Throws InvalidParameter on a non-positive temperature or a confidence
  /// scheme the dataset does not carry.
  void validate(const RoutingDataset* dataset = nullptr) const;

  bool operator==(const AggregationConfig&) const = default;
};

struct AggregateOutcome {
  std::string query_id;
  std::optional<std::string> answer;  // nullopt = abstain
  std::map<std::string, double> votes;
  bool tie_broken = false;

  bool abstained() const noexcept { return !answer.has_value(); }
};

/// Majority vote over the real members; ties go to the answer whose voters
/// have the highest mean router score, then to the lexicographically smallest.
AggregateOutcome aggregate_majority(const PredictionSet& set, const std::map<std::string, std::string>& answers,
                                    const AugmentedScoreRow& r, const ModelPool& pool);

/// Softmax(w / T) over the real members, then the answer with the largest mass.
/// `weights` maps model name to its raw weight.
AggregateOutcome aggregate_weighted(const PredictionSet& set, const std::map<std::string, std::string>& answers,
                                    const std::map<std::string, double>& weights, const AggregationConfig& config,
                                    const ModelPool& pool);

/// Softmax with max-subtraction.
std::vector<double> softmax(std::span<const double> weights, double temperature);

/// Raw weights of the set's real members under `scheme`.
std::map<std::string, double> member_weights(const PredictionSet& set, const QueryRecord& record,
                                             const AugmentedScoreRow& r, const WeightScheme& scheme,
                                             const ModelPool& pool);

/// Dispatches on config.method. Weighted configs must carry a temperature.
AggregateOutcome aggregate(const PredictionSet& set, const QueryRecord& record, const AugmentedScoreRow& r,
                           const AggregationConfig& config, const ModelPool& pool);

/// Share of outcomes whose answer equals the record's gold answer; abstentions
/// count as incorrect. Outcomes and records are index-aligned.
double accuracy(std::span<const AggregateOutcome> outcomes, const RoutingDataset& dataset);

inline const std::vector<double> kDefaultTemperatureGrid{0.25, 0.5, 1.0, 2.0, 4.0, 8.0};

/// Grid argmax of weighted-aggregation accuracy on `val`; ties go to the smaller T.
double tune_temperature(const RoutingDataset& val, const CalibrationResult& calib, const WeightScheme& scheme,
                        std::span<const double> grid = kDefaultTemperatureGrid);

/// Fills in a missing weighted temperature by tuning on `val`.
AggregationConfig resolve_config(const AggregationConfig& config, const RoutingDataset& val,
                                 const CalibrationResult& calib,
                                 std::span<const double> grid = kDefaultTemperatureGrid);

/// Validation accuracy of one (calibration, aggregation) pair.
double validation_accuracy(const RoutingDataset& val, const CalibrationResult& calib, const AggregationConfig& config);

struct ConfigSelection {
  double alpha = 0.0;
  AggregationConfig config;
  CalibrationResult calibration;
  double val_accuracy = 0.0;
  std::vector<double> skipped_alphas;  // infeasible for the calibration size
};

/// Grid search over (alpha, method): calibrate on `cal`, score accuracy on
/// `val`. Ties prefer the smaller alpha, then the earlier method.
ConfigSelection select_config(const RoutingDataset& val, const RoutingDataset& cal, std::span<const double> alpha_grid,
                              std::span<const AggregationConfig> methods, ScoreKind kind, std::uint64_t seed,
                              std::span<const double> temperature_grid = kDefaultTemperatureGrid);

}  // namespace racer
