#include "racer/evaluation.hpp"

#include <cmath>
#include <numeric>
#include <string_view>
#include <unordered_map>

#include "racer/error.hpp"
#include "racer/parallel.hpp"
#include "racer/pipeline.hpp"
#include "racer/rng.hpp"

namespace racer {

MetricsReport evaluate(std::span<const PredictionSet> sets, const RoutingDataset& dataset,
                       std::span<const AggregateOutcome> outcomes) {
  const std::size_t n = sets.size();
  if (dataset.size() != n || outcomes.size() != n)
    throw Error(ErrorCode::Misalignment, "sets, records and outcomes differ in count");

  std::unordered_map<std::string_view, const QueryRecord*> records;
  std::unordered_map<std::string_view, const AggregateOutcome*> by_id;
  for (const auto& r : dataset.records) records.emplace(r.id, &r);
  for (const auto& o : outcomes) by_id.emplace(o.query_id, &o);

  MetricsReport m;
  m.n_test = n;
  if (n == 0) return m;
  std::size_t missed = 0, real = 0, hits = 0, abstained = 0;
  for (const auto& set : sets) {
    auto rec = records.find(set.query_id);
    auto out = by_id.find(set.query_id);
    if (rec == records.end() || out == by_id.end())
      throw Error(ErrorCode::Misalignment, "query '" + set.query_id + "' missing from dataset or outcomes");
    if (misses(set, rec->second->correct)) ++missed;
    real += set.real_size();
    if (set.abstain) ++abstained;
    const auto& answer = out->second->answer;
    if (answer && *answer == rec->second->gold) ++hits;
  }
  const double dn = static_cast<double>(n);
  m.risk = static_cast<double>(missed) / dn;
  m.avg_size = static_cast<double>(real) / dn;
  m.accuracy = static_cast<double>(hits) / dn;
  m.abstain_rate = static_cast<double>(abstained) / dn;
  return m;
}

double SampleStats::se() const { return n > 0 ? sd / std::sqrt(static_cast<double>(n)) : 0.0; }

SampleStats summarize(std::span<const double> values) {
  SampleStats st;
  st.n = values.size();
  if (values.empty()) return st;
  st.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - st.mean) * (v - st.mean);
    st.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return st;
}

double TrialReport::se_risk() const { return n_trials ? sd_risk / std::sqrt(static_cast<double>(n_trials)) : 0.0; }
double TrialReport::se_size() const { return n_trials ? sd_size / std::sqrt(static_cast<double>(n_trials)) : 0.0; }

namespace {

struct TrialResult {
  MetricsReport metrics;
  double lambda = 0.0;
};

TrialResult run_one_trial(const RoutingDataset& dataset, std::span<const std::size_t> pool_indices,
                          std::size_t n_cal, double alpha, ScoreKind kind, std::uint64_t trial_seed,
                          const AggregationConfig& aggregation, const RoutingDataset& val,
                          std::span<const double> temperature_grid) {
  const auto order = shuffled_indices(pool_indices.size(), trial_seed);
  std::vector<std::size_t> cal_idx, test_idx;
  cal_idx.reserve(n_cal);
  test_idx.reserve(order.size() - n_cal);
  for (std::size_t i = 0; i < order.size(); ++i)
    (i < n_cal ? cal_idx : test_idx).push_back(pool_indices[order[i]]);
  const auto cal = subset(dataset, cal_idx);
  const auto test = subset(dataset, test_idx);

  const ScorePipeline pipeline{kind, smoothing_seed_for(trial_seed)};
  const auto calib = calibrate_dataset(cal, alpha, pipeline);
  const auto config = resolve_config(aggregation, val, calib, temperature_grid);

  const auto scored = score_dataset(test, pipeline);
  const auto sets = route_batch(scored.rows, calib);
  std::vector<AggregateOutcome> outcomes;
  outcomes.reserve(test.size());
  for (std::size_t i = 0; i < test.size(); ++i)
    outcomes.push_back(aggregate(sets[i], test.records[i], scored.augmented[i], config, test.pool));
  return {evaluate(sets, test, outcomes), calib.lambda_hat};
}

}  // namespace

TrialReport run_trials(const RoutingDataset& dataset, double alpha, ScoreKind kind, std::size_t n_trials,
                       const SplitSpec& split, std::uint64_t base_seed, const TrialOptions& options) {
  if (n_trials == 0) throw Error(ErrorCode::InvalidParameter, "n_trials must be at least 1");
  if (dataset.empty()) throw Error(ErrorCode::InvalidParameter, "dataset is empty");
  const auto [n_cal, n_val, n_test] = split_sizes(dataset.size(), split);
  if (n_cal == 0) throw Error(ErrorCode::EmptyCalibration, "calibration share is empty");
  if (n_test == 0) throw Error(ErrorCode::DegenerateSplit, "test share is empty");
  allowed_exceedances(n_cal, alpha);  // AlphaInfeasible before any work

  const AggregationConfig aggregation = options.aggregation.value_or(AggregationConfig::majority());
  aggregation.validate(&dataset);

  // Validation is drawn once; trials only reshuffle calibration and test.
  std::vector<std::size_t> val_idx, pool_idx;
  if (n_val > 0) {
    const auto perm = shuffled_indices(dataset.size(), rng::derive_seed(base_seed, "validation"));
    val_idx.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_val));
    pool_idx.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_val), perm.end());
  } else {
    pool_idx.resize(dataset.size());
    std::iota(pool_idx.begin(), pool_idx.end(), std::size_t{0});
  }
  const auto val = subset(dataset, val_idx);

  std::vector<TrialResult> results(n_trials);
  parallel_for(n_trials, options.threads, [&](std::size_t t) {
    results[t] = run_one_trial(dataset, pool_idx, n_cal, alpha, kind, base_seed + t, aggregation, val,
                               options.temperature_grid);
  });

  TrialReport rep;
  rep.alpha = alpha;
  rep.kind = kind;
  rep.n_trials = n_trials;
  rep.n_cal = n_cal;
  rep.n_test = n_test;
  rep.base_seed = base_seed;
  for (const auto& r : results) {
    rep.risks.push_back(r.metrics.risk);
    rep.sizes.push_back(r.metrics.avg_size);
    rep.accuracies.push_back(r.metrics.accuracy);
    rep.lambdas.push_back(r.lambda);
  }
  const auto risk = summarize(rep.risks);
  const auto size = summarize(rep.sizes);
  const auto acc = summarize(rep.accuracies);
  rep.mean_risk = risk.mean;
  rep.sd_risk = risk.sd;
  rep.mean_size = size.mean;
  rep.sd_size = size.sd;
  rep.mean_accuracy = acc.mean;
  rep.sd_accuracy = acc.sd;
  rep.lower_bound = alpha - 2.0 / (static_cast<double>(n_cal) + 1.0);
  return rep;
}

std::vector<TrialReport> sweep_alpha(const RoutingDataset& dataset, std::span<const double> alphas,
                                     std::span<const ScoreKind> kinds, std::size_t n_trials, const SplitSpec& split,
                                     std::uint64_t seed, const TrialOptions& options) {
  if (alphas.empty() || kinds.empty()) throw Error(ErrorCode::EmptyGrid, "sweep needs at least one alpha and kind");
  const auto [n_cal, n_val, n_test] = split_sizes(dataset.size(), split);
  for (double a : alphas) allowed_exceedances(n_cal, a);

  std::vector<TrialReport> table;
  for (auto kind : kinds)
    for (double a : alphas) table.push_back(run_trials(dataset, a, kind, n_trials, split, seed, options));
  return table;
}

EnsembleComparison compare_full_ensemble(const RoutingDataset& test, const CalibrationResult& calib,
                                         const AggregationConfig& config) {
  if (test.empty()) throw Error(ErrorCode::InvalidParameter, "test slice is empty");
  config.validate(&test);
  if (config.method == AggregationMethod::Weighted && !config.temperature)
    throw Error(ErrorCode::InvalidParameter, "weighted comparison needs an explicit temperature");

  const auto scored = score_dataset(test, calib.pipeline());
  const auto sets = route_batch(scored.rows, calib);
  const std::size_t k = test.pool.size();

  std::vector<AggregateOutcome> racer, full;
  EnsembleComparison cmp;
  cmp.n_queries = test.size();
  for (std::size_t i = 0; i < test.size(); ++i) {
    const auto& rec = test.records[i];
    racer.push_back(aggregate(sets[i], rec, scored.augmented[i], config, test.pool));
    full.push_back(aggregate(full_pool_set(rec.id, k), rec, scored.augmented[i], config, test.pool));
    cmp.racer_calls += sets[i].real_size();
  }
  cmp.full_calls = test.size() * k;
  cmp.racer_accuracy = accuracy(racer, test);
  cmp.full_accuracy = accuracy(full, test);
  cmp.calls_saved_frac = 1.0 - static_cast<double>(cmp.racer_calls) / static_cast<double>(cmp.full_calls);
  return cmp;
}

}  // namespace racer
