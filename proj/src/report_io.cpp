#include "racer/report_io.hpp"

#include <algorithm>
#include <sstream>

#include "racer/error.hpp"

namespace racer::report_io {

using json_io::format_double;

namespace {

template <typename T>
T field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) throw Error(ErrorCode::Schema, std::string("missing field '") + name + "'");
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Schema, std::string("field '") + name + "' has the wrong type");
  }
}

std::string join_row(std::initializer_list<std::string> cells) {
  std::string out;
  bool first = true;
  for (const auto& c : cells) {
    if (!first) out += ',';
    first = false;
    out += c;
  }
  out += '\n';
  return out;
}

std::string num(double v) { return format_double(v); }
std::string num(std::size_t v) { return std::to_string(v); }

}  // namespace

json to_json(const CalibrationResult& c) {
  json j;
  j["lambda_hat"] = c.lambda_hat;
  j["alpha"] = c.alpha;
  j["n"] = c.n;
  j["kind"] = std::string(to_string(c.kind));
  j["smoothing_seed"] = c.smoothing_seed ? json(*c.smoothing_seed) : json(nullptr);
  j["empirical_exceedances"] = c.empirical_exceedances;
  return j;
}

CalibrationResult calibration_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::Schema, "calibration must be a JSON object");
  CalibrationResult c;
  c.lambda_hat = field<double>(j, "lambda_hat");
  c.alpha = field<double>(j, "alpha");
  c.n = field<std::size_t>(j, "n");
  c.kind = parse_score_kind(field<std::string>(j, "kind"));
  if (auto it = j.find("smoothing_seed"); it != j.end() && !it->is_null())
    c.smoothing_seed = field<std::uint64_t>(j, "smoothing_seed");
  c.empirical_exceedances = field<std::size_t>(j, "empirical_exceedances");
  return c;
}

json to_json(const AggregationConfig& a) {
  json j;
  j["method"] = a.method == AggregationMethod::Majority ? "majority" : "weighted";
  if (a.method == AggregationMethod::Weighted) {
    j["weight_scheme"] = a.weight_scheme.to_string();
    j["temperature"] = a.temperature ? json(*a.temperature) : json(nullptr);
  }
  return j;
}

AggregationConfig aggregation_from_json(const json& j) {
  const auto method = field<std::string>(j, "method");
  if (method == "majority") return AggregationConfig::majority();
  if (method != "weighted") throw Error(ErrorCode::Schema, "unknown aggregation method '" + method + "'");
  std::optional<double> t;
  if (auto it = j.find("temperature"); it != j.end() && !it->is_null()) t = field<double>(j, "temperature");
  auto cfg = AggregationConfig::weighted(WeightScheme::parse(field<std::string>(j, "weight_scheme")), t);
  cfg.validate();
  return cfg;
}

json to_json(const PredictionSet& set, const ModelPool& pool) {
  json j;
  j["id"] = set.query_id;
  j["members"] = member_names(set, pool);
  j["abstain"] = set.abstain;
  return j;
}

PredictionSet prediction_set_from_json(const json& j, const ModelPool& pool) {
  PredictionSet set;
  set.query_id = field<std::string>(j, "id");
  set.pool_size = pool.size();
  for (const auto& name : field<std::vector<std::string>>(j, "members")) {
    if (name == pool.null_id()) {
      set.members.push_back(pool.null_index());
    } else if (auto k = pool.index_of(name)) {
      set.members.push_back(*k);
    } else {
      throw Error(ErrorCode::Schema, set.query_id + ": unknown model '" + name + "' in members");
    }
  }
  std::sort(set.members.begin(), set.members.end());
  set.members.erase(std::unique(set.members.begin(), set.members.end()), set.members.end());
  set.abstain = field<bool>(j, "abstain");
  if (set.abstain != (set.real_size() == 0))
    throw Error(ErrorCode::Schema, set.query_id + ": abstain flag contradicts members");
  return set;
}

json to_json(const AggregateOutcome& o) {
  json j;
  j["id"] = o.query_id;
  j["abstain"] = o.abstained();
  j["answer"] = o.answer ? json(*o.answer) : json(nullptr);
  j["votes"] = o.votes;
  j["tie_broken"] = o.tie_broken;
  return j;
}

AggregateOutcome outcome_from_json(const json& j) {
  AggregateOutcome o;
  o.query_id = field<std::string>(j, "id");
  if (auto it = j.find("answer"); it != j.end() && !it->is_null()) o.answer = field<std::string>(j, "answer");
  if (field<bool>(j, "abstain") != !o.answer.has_value())
    throw Error(ErrorCode::Schema, o.query_id + ": abstain flag contradicts answer");
  if (j.contains("votes")) o.votes = field<std::map<std::string, double>>(j, "votes");
  if (j.contains("tie_broken")) o.tie_broken = field<bool>(j, "tie_broken");
  return o;
}

json to_json(const MetricsReport& m) {
  return json{{"risk", m.risk},
              {"avg_size", m.avg_size},
              {"accuracy", m.accuracy},
              {"abstain_rate", m.abstain_rate},
              {"n_test", m.n_test}};
}

json to_json(const TrialReport& r) {
  json j;
  j["alpha"] = r.alpha;
  j["kind"] = std::string(to_string(r.kind));
  j["n_trials"] = r.n_trials;
  j["n_cal"] = r.n_cal;
  j["n_test"] = r.n_test;
  j["base_seed"] = r.base_seed;
  j["risks"] = r.risks;
  j["sizes"] = r.sizes;
  j["accuracies"] = r.accuracies;
  j["lambdas"] = r.lambdas;
  j["mean_risk"] = r.mean_risk;
  j["sd_risk"] = r.sd_risk;
  j["mean_size"] = r.mean_size;
  j["sd_size"] = r.sd_size;
  j["mean_accuracy"] = r.mean_accuracy;
  j["sd_accuracy"] = r.sd_accuracy;
  j["lower_bound"] = r.lower_bound;
  return j;
}

json to_json(const EnsembleComparison& c) {
  return json{{"n_queries", c.n_queries},         {"racer_accuracy", c.racer_accuracy},
              {"full_accuracy", c.full_accuracy}, {"accuracy_gain", c.accuracy_gain()},
              {"racer_calls", c.racer_calls},     {"full_calls", c.full_calls},
              {"calls_saved_frac", c.calls_saved_frac}};
}

json to_json(const ConfigSelection& s) {
  return json{{"alpha", s.alpha},
              {"config", to_json(s.config)},
              {"calibration", to_json(s.calibration)},
              {"val_accuracy", s.val_accuracy},
              {"skipped_alphas", s.skipped_alphas}};
}

std::string metrics_csv(const MetricsReport& m) {
  return join_row({"risk", "avg_size", "accuracy", "abstain_rate", "n_test"}) +
         join_row({num(m.risk), num(m.avg_size), num(m.accuracy), num(m.abstain_rate), num(m.n_test)});
}

std::string trials_csv(const TrialReport& r) {
  std::string out = join_row({"kind", "alpha", "trial", "seed", "risk", "size", "accuracy", "lambda_hat"});
  for (std::size_t t = 0; t < r.n_trials; ++t)
    out += join_row({std::string(to_string(r.kind)), num(r.alpha), num(t), std::to_string(r.base_seed + t),
                     num(r.risks[t]), num(r.sizes[t]), num(r.accuracies[t]), num(r.lambdas[t])});
  return out;
}

std::string sweep_csv(const std::vector<TrialReport>& table) {
  std::string out = join_row({"kind", "alpha", "n_trials", "n_cal", "n_test", "mean_risk", "sd_risk", "se_risk",
                              "mean_size", "sd_size", "se_size", "mean_accuracy", "sd_accuracy", "lower_bound"});
  for (const auto& r : table)
    out += join_row({std::string(to_string(r.kind)), num(r.alpha), num(r.n_trials), num(r.n_cal), num(r.n_test),
                     num(r.mean_risk), num(r.sd_risk), num(r.se_risk()), num(r.mean_size), num(r.sd_size),
                     num(r.se_size()), num(r.mean_accuracy), num(r.sd_accuracy), num(r.lower_bound)});
  return out;
}

std::string comparison_csv(const EnsembleComparison& c) {
  return join_row({"n_queries", "racer_accuracy", "full_accuracy", "accuracy_gain", "racer_calls", "full_calls",
                   "calls_saved_frac"}) +
         join_row({num(c.n_queries), num(c.racer_accuracy), num(c.full_accuracy), num(c.accuracy_gain()),
                   num(c.racer_calls), num(c.full_calls), num(c.calls_saved_frac)});
}

std::vector<json> parse_json_lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::Parse, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace racer::report_io
