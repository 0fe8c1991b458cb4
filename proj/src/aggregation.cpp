#include "racer/aggregation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "racer/error.hpp"
#include "racer/pipeline.hpp"

namespace racer {

// ---------------------------------------------------------------------------
// Config parsing

WeightScheme WeightScheme::parse(const std::string& text) {
  if (text == "router_score") return router_score();
  if (text.rfind("confidence:", 0) == 0 && text.size() > 11) return from_confidence(text.substr(11));
  throw Error(ErrorCode::InvalidParameter,
              "unknown weight scheme '" + text + "' (expected router_score|confidence:<name>)");
}

std::string WeightScheme::to_string() const { return confidence ? "confidence:" + *confidence : "router_score"; }

AggregationConfig AggregationConfig::parse(const std::string& text) {
  std::string body = text;
  std::optional<double> temperature;
  if (auto at = text.rfind('@'); at != std::string::npos) {
    body = text.substr(0, at);
    try {
      std::size_t used = 0;
      temperature = std::stod(text.substr(at + 1), &used);
      if (used != text.size() - at - 1) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidParameter, "bad temperature in '" + text + "'");
    }
  }
  AggregationConfig cfg;
  if (body == "majority") {
    if (temperature) throw Error(ErrorCode::InvalidParameter, "majority voting takes no temperature");
  } else if (body.rfind("weighted:", 0) == 0) {
    cfg = weighted(WeightScheme::parse(body.substr(9)), temperature);
  } else if (body == "weighted") {
    cfg = weighted(WeightScheme::router_score(), temperature);
  } else {
    throw Error(ErrorCode::InvalidParameter, "unknown aggregation method '" + text + "'");
  }
  cfg.validate();
  return cfg;
}

std::string AggregationConfig::to_string() const {
  if (method == AggregationMethod::Majority) return "majority";
  return "weighted:" + weight_scheme.to_string();
}

void AggregationConfig::validate(const RoutingDataset* dataset) const {
  if (method != AggregationMethod::Weighted) return;
  if (temperature && !(std::isfinite(*temperature) && *temperature > 0.0))
    throw Error(ErrorCode::InvalidParameter, "temperature must be positive");
  if (dataset && weight_scheme.confidence && !dataset->has_confidence_scheme(*weight_scheme.confidence))
    throw Error(ErrorCode::InvalidParameter,
                "dataset has no confidence scheme '" + *weight_scheme.confidence + "'");
}

// ---------------------------------------------------------------------------
// Voting

namespace {

const std::string& answer_of(const std::map<std::string, std::string>& answers, const std::string& model,
                             const std::string& query_id) {
  auto it = answers.find(model);
  if (it == answers.end())
    throw Error(ErrorCode::MissingAnswer, query_id + ": no answer for model '" + model + "'");
  return it->second;
}

}  // namespace

AggregateOutcome aggregate_majority(const PredictionSet& set, const std::map<std::string, std::string>& answers,
                                    const AugmentedScoreRow& r, const ModelPool& pool) {
  AggregateOutcome out{set.query_id, std::nullopt, {}, false};
  const auto voters = set.real_members();
  if (voters.empty()) return out;

  struct Group {
    std::size_t count = 0;
    double score_sum = 0.0;
  };
  std::map<std::string, Group> groups;
  for (auto m : voters) {
    auto& g = groups[answer_of(answers, pool.name(m), set.query_id)];
    ++g.count;
    g.score_sum += r.r.at(m);
  }

  std::size_t top = 0;
  for (const auto& [_, g] : groups) top = std::max(top, g.count);

  // std::map iterates answers in lexicographic order, so strict '>' keeps the
  // smallest answer on exact mean-score ties.
  const std::string* best = nullptr;
  double best_mean = -std::numeric_limits<double>::infinity();
  std::size_t tied = 0;
  for (const auto& [answer, g] : groups) {
    out.votes[answer] = static_cast<double>(g.count);
    if (g.count != top) continue;
    ++tied;
    const double mean = g.score_sum / static_cast<double>(g.count);
    if (!best || mean > best_mean) {
      best = &answer;
      best_mean = mean;
    }
  }
  out.answer = *best;
  out.tie_broken = tied > 1;
  return out;
}

std::vector<double> softmax(std::span<const double> weights, double temperature) {
  if (!(std::isfinite(temperature) && temperature > 0.0))
    throw Error(ErrorCode::InvalidParameter, "temperature must be positive");
  std::vector<double> out(weights.size());
  if (weights.empty()) return out;
  const double top = *std::max_element(weights.begin(), weights.end());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    out[i] = std::exp((weights[i] - top) / temperature);
    total += out[i];
  }
  for (double& w : out) w /= total;
  return out;
}

AggregateOutcome aggregate_weighted(const PredictionSet& set, const std::map<std::string, std::string>& answers,
                                    const std::map<std::string, double>& weights, const AggregationConfig& config,
                                    const ModelPool& pool) {
  if (config.method != AggregationMethod::Weighted)
    throw Error(ErrorCode::InvalidParameter, "aggregate_weighted needs a weighted config");
  if (!config.temperature) throw Error(ErrorCode::InvalidParameter, "weighted aggregation needs a temperature");

  AggregateOutcome out{set.query_id, std::nullopt, {}, false};
  const auto voters = set.real_members();
  if (voters.empty()) return out;

  std::vector<double> raw;
  std::vector<const std::string*> voter_answers;
  for (auto m : voters) {
    const auto& name = pool.name(m);
    auto it = weights.find(name);
    if (it == weights.end()) throw Error(ErrorCode::MissingWeight, set.query_id + ": no weight for model '" + name + "'");
    if (!std::isfinite(it->second))
      throw Error(ErrorCode::InvalidParameter, set.query_id + ": non-finite weight for model '" + name + "'");
    raw.push_back(it->second);
    voter_answers.push_back(&answer_of(answers, name, set.query_id));
  }

  const auto normalized = softmax(raw, *config.temperature);
  for (std::size_t i = 0; i < voters.size(); ++i) out.votes[*voter_answers[i]] += normalized[i];

  const std::string* best = nullptr;
  double best_mass = -1.0;
  std::size_t tied = 0;
  for (const auto& [answer, mass] : out.votes) {
    if (mass > best_mass) {
      best = &answer;
      best_mass = mass;
      tied = 1;
    } else if (mass == best_mass) {
      ++tied;
    }
  }
  out.answer = *best;
  out.tie_broken = tied > 1;
  return out;
}

std::map<std::string, double> member_weights(const PredictionSet& set, const QueryRecord& record,
                                             const AugmentedScoreRow& r, const WeightScheme& scheme,
                                             const ModelPool& pool) {
  std::map<std::string, double> out;
  const std::map<std::string, double>* conf = nullptr;
  if (scheme.confidence) {
    auto it = record.confidences.find(*scheme.confidence);
    if (it != record.confidences.end()) conf = &it->second;
  }
  for (auto m : set.real_members()) {
    const auto& name = pool.name(m);
    if (!scheme.confidence) {
      out[name] = r.r.at(m);
    } else if (conf) {
      if (auto it = conf->find(name); it != conf->end()) out[name] = it->second;
    }
  }
  return out;
}

AggregateOutcome aggregate(const PredictionSet& set, const QueryRecord& record, const AugmentedScoreRow& r,
                           const AggregationConfig& config, const ModelPool& pool) {
  if (config.method == AggregationMethod::Majority) return aggregate_majority(set, record.answers, r, pool);
  return aggregate_weighted(set, record.answers, member_weights(set, record, r, config.weight_scheme, pool), config,
                            pool);
}

double accuracy(std::span<const AggregateOutcome> outcomes, const RoutingDataset& dataset) {
  if (outcomes.size() != dataset.size())
    throw Error(ErrorCode::Misalignment, "outcome count does not match dataset size");
  if (outcomes.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    if (outcomes[i].query_id != dataset.records[i].id)
      throw Error(ErrorCode::Misalignment, "outcome '" + outcomes[i].query_id + "' is not aligned with record '" +
                                               dataset.records[i].id + "'");
    if (outcomes[i].answer && *outcomes[i].answer == dataset.records[i].gold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

// ---------------------------------------------------------------------------
// Validation-set tuning

namespace {

struct RoutedSlice {
  ScoredDataset scored;
  std::vector<PredictionSet> sets;
};

RoutedSlice route_slice(const RoutingDataset& ds, const CalibrationResult& calib) {
  RoutedSlice out{score_dataset(ds, calib.pipeline()), {}};
  out.sets = route_batch(out.scored.rows, calib);
  return out;
}

double slice_accuracy(const RoutingDataset& ds, const RoutedSlice& routed, const AggregationConfig& config) {
  std::vector<AggregateOutcome> outcomes;
  outcomes.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    outcomes.push_back(aggregate(routed.sets[i], ds.records[i], routed.scored.augmented[i], config, ds.pool));
  return accuracy(outcomes, ds);
}

double tune_on_routed(const RoutingDataset& val, const RoutedSlice& routed, const WeightScheme& scheme,
                      std::span<const double> grid) {
  double best_t = 0.0;
  double best_acc = -1.0;
  for (double t : grid) {
    const double acc = slice_accuracy(val, routed, AggregationConfig::weighted(scheme, t));
    if (acc > best_acc || (acc == best_acc && t < best_t)) {
      best_acc = acc;
      best_t = t;
    }
  }
  return best_t;
}

void check_grid(const RoutingDataset& val, std::span<const double> grid) {
  if (grid.empty()) throw Error(ErrorCode::EmptyGrid, "temperature grid is empty");
  for (double t : grid)
    if (!(std::isfinite(t) && t > 0.0)) throw Error(ErrorCode::InvalidParameter, "temperatures must be positive");
  if (val.empty()) throw Error(ErrorCode::EmptyValidation, "validation set is empty");
}

}  // namespace

double tune_temperature(const RoutingDataset& val, const CalibrationResult& calib, const WeightScheme& scheme,
                        std::span<const double> grid) {
  check_grid(val, grid);
  AggregationConfig::weighted(scheme, 1.0).validate(&val);
  return tune_on_routed(val, route_slice(val, calib), scheme, grid);
}

AggregationConfig resolve_config(const AggregationConfig& config, const RoutingDataset& val,
                                 const CalibrationResult& calib, std::span<const double> grid) {
  if (config.method != AggregationMethod::Weighted || config.temperature) return config;
  AggregationConfig out = config;
  out.temperature = tune_temperature(val, calib, config.weight_scheme, grid);
  return out;
}

double validation_accuracy(const RoutingDataset& val, const CalibrationResult& calib, const AggregationConfig& config) {
  if (val.empty()) throw Error(ErrorCode::EmptyValidation, "validation set is empty");
  return slice_accuracy(val, route_slice(val, calib), config);
}

ConfigSelection select_config(const RoutingDataset& val, const RoutingDataset& cal, std::span<const double> alpha_grid,
                              std::span<const AggregationConfig> methods, ScoreKind kind, std::uint64_t seed,
                              std::span<const double> temperature_grid) {
  if (alpha_grid.empty()) throw Error(ErrorCode::EmptyGrid, "alpha grid is empty");
  if (methods.empty()) throw Error(ErrorCode::EmptyGrid, "method grid is empty");
  if (val.empty()) throw Error(ErrorCode::EmptyValidation, "validation set is empty");
  if (cal.empty()) throw Error(ErrorCode::EmptyCalibration, "calibration set is empty");
  for (const auto& m : methods) m.validate(&val);

  const ScorePipeline pipeline{kind, smoothing_seed_for(seed)};
  const auto cal_scored = score_dataset(cal, pipeline);
  const auto criticals = critical_scores(cal_scored.rows, ground_truth(cal));

  std::vector<double> alphas(alpha_grid.begin(), alpha_grid.end());
  std::sort(alphas.begin(), alphas.end());

  std::optional<ConfigSelection> best;
  std::vector<double> skipped;
  std::optional<AlphaInfeasibleError> last_infeasible;
  for (double alpha : alphas) {
    CalibrationResult calib;
    try {
      calib = calibrate(criticals, alpha, pipeline);
    } catch (const AlphaInfeasibleError& e) {
      skipped.push_back(alpha);
      last_infeasible = e;
      continue;
    }
    const auto routed = route_slice(val, calib);
    for (const auto& method : methods) {
      AggregationConfig cfg = method;
      if (cfg.method == AggregationMethod::Weighted && !cfg.temperature) {
        check_grid(val, temperature_grid);
        cfg.temperature = tune_on_routed(val, routed, cfg.weight_scheme, temperature_grid);
      }
      const double acc = slice_accuracy(val, routed, cfg);
      // Strict '>' keeps the earlier (smaller alpha, earlier method) cell on ties.
      if (!best || acc > best->val_accuracy) best = ConfigSelection{alpha, cfg, calib, acc, {}};
    }
  }
  if (!best) throw *last_infeasible;
  best->skipped_alphas = std::move(skipped);
  return *best;
}

}  // namespace racer
