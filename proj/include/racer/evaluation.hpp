#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "racer/aggregation.hpp"
#include "racer/calibration.hpp"
#include "racer/dataset.hpp"
#include "racer/router.hpp"

namespace racer {

struct MetricsReport {
  double risk = 0.0;      // share of queries whose set misses G'
  double avg_size = 0.0;  // real models per set, null model excluded
  double accuracy = 0.0;  // abstentions count as incorrect
  double abstain_rate = 0.0;
  std::size_t n_test = 0;
};

/// Matches sets, records and outcomes by query id (any order). Throws
/// Misalignment when the three do not cover the same queries.
MetricsReport evaluate(std::span<const PredictionSet> sets, const RoutingDataset& dataset,
                       std::span<const AggregateOutcome> outcomes);

struct SampleStats {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation, 0 for fewer than two values
  double se() const;
  std::size_t n = 0;
};

SampleStats summarize(std::span<const double> values);

struct TrialReport {
  double alpha = 0.0;
  ScoreKind kind = ScoreKind::Gap;
  std::size_t n_trials = 0;
  std::size_t n_cal = 0;
  std::size_t n_test = 0;
  std::uint64_t base_seed = 0;
  std::vector<double> risks;
  std::vector<double> sizes;
  std::vector<double> accuracies;
  std::vector<double> lambdas;
  double mean_risk = 0.0, sd_risk = 0.0;
  double mean_size = 0.0, sd_size = 0.0;
  double mean_accuracy = 0.0, sd_accuracy = 0.0;
  double lower_bound = 0.0;  // alpha - 2 / (n_cal + 1)

  double se_risk() const;
  double se_size() const;
};

struct TrialOptions {
  std::optional<AggregationConfig> aggregation;  // defaults to majority voting
  unsigned threads = 1;
  std::span<const double> temperature_grid = kDefaultTemperatureGrid;
};

/// Monte Carlo harness. The validation share is held out once (seeded from
/// base_seed); each trial t reshuffles the remainder into calibration and test
/// with seed base_seed + t, smooths, calibrates, routes and evaluates. Results
/// are identical for any thread count.
TrialReport run_trials(const RoutingDataset& dataset, double alpha, ScoreKind kind, std::size_t n_trials,
                       const SplitSpec& split, std::uint64_t base_seed, const TrialOptions& options = {});

/// One TrialReport per (kind, alpha), kinds outermost, input order kept.
std::vector<TrialReport> sweep_alpha(const RoutingDataset& dataset, std::span<const double> alphas,
                                     std::span<const ScoreKind> kinds, std::size_t n_trials, const SplitSpec& split,
                                     std::uint64_t seed, const TrialOptions& options = {});

struct EnsembleComparison {
  std::size_t n_queries = 0;
  double racer_accuracy = 0.0;
  double full_accuracy = 0.0;
  std::size_t racer_calls = 0;
  std::size_t full_calls = 0;
  double calls_saved_frac = 0.0;

  double accuracy_gain() const { return racer_accuracy - full_accuracy; }
};

/// Aggregates once over the calibrated sets and once over the whole pool with
/// the same config. Weighted configs must carry a temperature.
EnsembleComparison compare_full_ensemble(const RoutingDataset& test, const CalibrationResult& calib,
                                         const AggregationConfig& config);

}  // namespace racer
