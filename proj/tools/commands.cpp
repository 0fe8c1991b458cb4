#include "commands.hpp"

#include <openssl/evp.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "racer/aggregation.hpp"
#include "racer/calibration.hpp"
#include "racer/dataset.hpp"
#include "racer/error.hpp"
#include "racer/evaluation.hpp"
#include "racer/json_io.hpp"
#include "racer/pipeline.hpp"
#include "racer/report_io.hpp"
#include "racer/rng.hpp"
#include "racer/router.hpp"

namespace racer::cli {

namespace fs = std::filesystem;
using json_io::json;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Helpers

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (item.empty()) throw UsageError("empty entry in list '" + text + "'");
    out.push_back(item);
  }
  if (out.empty()) throw UsageError("empty list");
  return out;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("not a number: '" + s + "'");
    out.push_back(v);
  }
  return out;
}

SplitSpec parse_split(const std::string& text, std::uint64_t seed) {
  auto f = parse_doubles(text);
  if (f.size() != 3) throw UsageError("--split expects cal,val,test fractions");
  SplitSpec spec{f[0], f[1], f[2], seed};
  try {
    spec.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return spec;
}

DataFormat infer_format(const std::string& path, const std::string& explicit_format) {
  if (explicit_format == "csv") return DataFormat::Csv;
  if (explicit_format == "jsonl") return DataFormat::Jsonl;
  if (!explicit_format.empty()) throw UsageError("unknown input format '" + explicit_format + "'");
  return fs::path(path).extension() == ".csv" ? DataFormat::Csv : DataFormat::Jsonl;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

unsigned thread_budget() {
  unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RACER_THREADS")) {
    try {
      long cap = std::stol(env);
      if (cap >= 1) threads = std::min<unsigned>(threads, static_cast<unsigned>(cap));
    } catch (const std::exception&) {
      throw UsageError("RACER_THREADS must be a positive integer");
    }
  }
  return threads;
}

/// Writes outputs and the run manifest; every emitted file is hashed.
class Run {
 public:
  Run(std::string command, const CLI::App& app) : command_(std::move(command)) {
    for (const auto* opt : app.get_options()) {
      if (opt->count() == 0 || opt->get_name() == "--help" || opt->get_name() == "-h") continue;
      auto results = opt->results();
      std::string value;
      for (std::size_t i = 0; i < results.size(); ++i) value += (i ? "," : "") + results[i];
      std::string name = opt->get_name();
      while (!name.empty() && name.front() == '-') name.erase(name.begin());
      arguments_[name] = value;
    }
  }

  void seed(const std::string& label, std::uint64_t value) { seeds_[label] = value; }

  void write(const fs::path& path, const std::string& contents) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out << contents;
    out.close();
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
    outputs_.push_back(path);
  }

  void write_json(const fs::path& path, const json& value) { write(path, json_io::dump(value) + "\n"); }

  void finish(const std::string& manifest_flag) {
    if (outputs_.empty()) return;
    fs::path manifest = manifest_flag.empty() ? fs::path(outputs_.front().string() + ".manifest.json")
                                              : fs::path(manifest_flag);
    json hashes = json::object();
    for (const auto& p : outputs_) hashes[p.string()] = sha256_file(p);
    json j{{"command", command_}, {"arguments", arguments_}, {"seeds", seeds_}, {"artifact_hashes", hashes}};
    std::ofstream out(manifest, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + manifest.string() + "'");
    out << json_io::dump(j) << "\n";
  }

 private:
  std::string command_;
  std::map<std::string, std::string> arguments_;
  std::map<std::string, std::uint64_t> seeds_;
  std::vector<fs::path> outputs_;
};

void add_output_format(CLI::App* app, std::string& format) {
  app->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

// Shared dataset flags.
struct InputFlags {
  std::string path;
  std::string format;
  bool normalize = false;

  void add(CLI::App* app, const char* name, bool required) {
    auto* opt = app->add_option(name, path, "Dataset file (JSONL or CSV)");
    if (required) opt->required();
    app->add_option("--input-format", format, "jsonl|csv (default: by extension)");
    app->add_flag("--normalize", normalize, "Min-max rescale base scores to [0,1]");
  }

  RoutingDataset load(const std::string& p) const {
    return load_dataset(p, infer_format(p, format), LoadOptions{normalize});
  }
  RoutingDataset load() const { return load(path); }
};

AggregationConfig parse_aggregation(const std::string& spec) {
  try {
    return AggregationConfig::parse(spec);
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
}

// ---------------------------------------------------------------------------
// Subcommands

struct SynthCmd {
  std::size_t n = 0;
  std::size_t models = 0;
  std::string accuracies;
  double sharpness = 4.0;
  std::uint64_t seed = 0;
  std::string colluding;
  std::string out;
  std::string manifest;

  void add(CLI::App& root, std::function<void()>& action, CLI::App*& sub) {
    sub = root.add_subcommand("synth", "Generate a synthetic routing dataset");
    sub->add_option("--n", n, "Number of queries")->required();
    sub->add_option("--models", models, "Pool size K")->required();
    sub->add_option("--accuracies", accuracies, "Comma-separated per-model accuracies")->required();
    sub->add_option("--sharpness", sharpness, "Router score sharpness");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--colluding", colluding, "Comma-separated model names sharing one wrong answer");
    sub->add_option("--out", out, "Output JSONL path")->required();
    sub->add_option("--manifest", manifest, "Manifest path (default: <out>.manifest.json)");
    action = [this, &sub] { run(*sub); };
  }

  void run(const CLI::App& app) {
    SynthConfig cfg;
    cfg.n = n;
    cfg.model_accuracies = parse_doubles(accuracies);
    if (cfg.model_accuracies.size() != models)
      throw UsageError("--accuracies has " + std::to_string(cfg.model_accuracies.size()) + " entries but --models is " +
                       std::to_string(models));
    cfg.score_sharpness = sharpness;
    cfg.seed = seed;
    const auto names = synthetic_model_names(models);
    if (!colluding.empty())
      for (const auto& name : split_list(colluding)) {
        auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) throw UsageError("--colluding names unknown model '" + name + "'");
        cfg.colluding_models.push_back(static_cast<std::size_t>(it - names.begin()));
      }
    RoutingDataset ds;
    try {
      ds = synthesize(cfg);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::InvalidParameter) throw UsageError(e.what());
      throw;
    }
    Run r("synth", app);
    r.seed("seed", seed);
    r.write(out, to_jsonl(ds));
    r.finish(manifest);
  }
};

struct CalibrateCmd {
  InputFlags input;
  std::string cal_input;
  double alpha = 0.0;
  std::string score;
  std::uint64_t seed = 0;
  std::string split;
  std::string out;
  std::string test_out;
  std::string val_out;
  std::string manifest;

  void add(CLI::App& root, std::function<void()>& action, CLI::App*& sub) {
    sub = root.add_subcommand("calibrate", "Calibrate the routing threshold");
    input.add(sub, "--input", false);
    sub->add_option("--cal-input", cal_input, "Use this file as the whole calibration set");
    sub->add_option("--alpha", alpha, "Target risk level")->required();
    sub->add_option("--score", score, "Non-conformity score")->required()->check(CLI::IsMember({"gap", "prob"}));
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--split", split, "cal,val,test fractions applied to --input");
    sub->add_option("--out", out, "CalibrationResult JSON path")->required();
    sub->add_option("--test-out", test_out, "Write the test split as JSONL");
    sub->add_option("--val-out", val_out, "Write the validation split as JSONL");
    sub->add_option("--manifest", manifest, "Manifest path");
    action = [this, &sub] { run(*sub); };
  }

  void run(const CLI::App& app) {
    const bool use_split = !split.empty();
    if (use_split == !cal_input.empty()) throw UsageError("give exactly one of --split (with --input) or --cal-input");
    if (use_split && input.path.empty()) throw UsageError("--split needs --input");
    if (!use_split && (!test_out.empty() || !val_out.empty()))
      throw UsageError("--test-out/--val-out require --split");

    Run r("calibrate", app);
    const std::uint64_t smooth_seed = smoothing_seed_for(seed);
    r.seed("seed", seed);
    r.seed("smoothing_seed", smooth_seed);

    RoutingDataset cal;
    std::optional<DatasetSplit> parts;
    if (use_split) {
      const std::uint64_t split_seed = rng::derive_seed(seed, "split");
      r.seed("split_seed", split_seed);
      parts = racer::split(input.load(), parse_split(split, split_seed));
      cal = parts->cal;
    } else {
      cal = input.load(cal_input);
    }
    const auto calib = calibrate_dataset(cal, alpha, {parse_score_kind(score), smooth_seed});
    r.write_json(out, report_io::to_json(calib));
    if (parts && !test_out.empty()) r.write(test_out, to_jsonl(parts->test));
    if (parts && !val_out.empty()) r.write(val_out, to_jsonl(parts->val));
    r.finish(manifest);
  }
};

struct RouteCmd {
  InputFlags input;
  std::string calib_path;
  std::string score;
  std::string aggregate_method;
  std::string weight_scheme = "router_score";
  std::optional<double> temperature;
  std::string out;
  std::string outcomes;
  std::string manifest;

  void add(CLI::App& root, std::function<void()>& action, CLI::App*& sub) {
    sub = root.add_subcommand("route", "Build prediction sets (and optionally final answers)");
    sub->add_option("--calib", calib_path, "CalibrationResult JSON")->required();
    input.add(sub, "--input", true);
    sub->add_option("--score", score, "Expected score kind (must match the calibration)")
        ->check(CLI::IsMember({"gap", "prob"}));
    sub->add_option("--aggregate", aggregate_method, "majority|weighted")
        ->check(CLI::IsMember({"majority", "weighted"}));
    sub->add_option("--weight-scheme", weight_scheme, "router_score|confidence:<name>");
    sub->add_option("--temperature", temperature, "Softmax temperature for weighted voting");
    sub->add_option("--out", out, "PredictionSet JSONL path")->required();
    sub->add_option("--outcomes", outcomes, "AggregateOutcome JSONL path");
    sub->add_option("--manifest", manifest, "Manifest path");
    action = [this, &sub] { run(*sub); };
  }

  void run(const CLI::App& app) {
    if (!aggregate_method.empty() && outcomes.empty()) throw UsageError("--aggregate needs --outcomes");
    if (aggregate_method.empty() && !outcomes.empty()) throw UsageError("--outcomes needs --aggregate");
    std::optional<AggregationConfig> config;
    if (aggregate_method == "majority") {
      config = AggregationConfig::majority();
    } else if (aggregate_method == "weighted") {
      if (!temperature) throw UsageError("weighted aggregation needs --temperature");
      try {
        config = AggregationConfig::weighted(WeightScheme::parse(weight_scheme), temperature);
        config->validate();
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }

    const auto calib = report_io::calibration_from_json(json::parse(read_file(calib_path)));
    if (!score.empty() && parse_score_kind(score) != calib.kind)
      throw Error(ErrorCode::KindMismatch, "--score " + score + " but calibration was made with '" +
                                               std::string(to_string(calib.kind)) + "'");
    const auto ds = input.load();
    if (config) config->validate(&ds);

    const auto scored = score_dataset(ds, calib.pipeline());
    const auto sets = route_batch(scored.rows, calib);

    Run r("route", app);
    if (calib.smoothing_seed) r.seed("smoothing_seed", *calib.smoothing_seed);
    std::string lines;
    for (const auto& s : sets) lines += json_io::dump(report_io::to_json(s, ds.pool)) + "\n";
    r.write(out, lines);
    if (config) {
      std::string outcome_lines;
      for (std::size_t i = 0; i < ds.size(); ++i)
        outcome_lines += json_io::dump(report_io::to_json(
                             aggregate(sets[i], ds.records[i], scored.augmented[i], *config, ds.pool))) +
                         "\n";
      r.write(outcomes, outcome_lines);
    }
    r.finish(manifest);
  }
};

struct EvalCmd {
  InputFlags input;
  std::string sets_path;
  std::string outcomes_path;
  std::string out;
  std::string format = "json";
  std::string manifest;

  void add(CLI::App& root, std::function<void()>& action, CLI::App*& sub) {
    sub = root.add_subcommand("eval", "Risk / size / accuracy of routed output");
    input.add(sub, "--input", true);
    sub->add_option("--sets", sets_path, "PredictionSet JSONL")->required();
    sub->add_option("--outcomes", outcomes_path, "AggregateOutcome JSONL (default: majority vote)");
    sub->add_option("--out", out, "Report path")->required();
    add_output_format(sub, format);
    sub->add_option("--manifest", manifest, "Manifest path");
    action = [this, &sub] { run(*sub); };
  }

  void run(const CLI::App& app) {
    const auto ds = input.load();
    std::vector<PredictionSet> sets;
    for (const auto& j : report_io::parse_json_lines(read_file(sets_path)))
      sets.push_back(report_io::prediction_set_from_json(j, ds.pool));

    std::vector<AggregateOutcome> outcomes;
    if (!outcomes_path.empty()) {
      for (const auto& j : report_io::parse_json_lines(read_file(outcomes_path)))
        outcomes.push_back(report_io::outcome_from_json(j));
    } else {
      std::map<std::string, const QueryRecord*> by_id;
      for (const auto& rec : ds.records) by_id[rec.id] = &rec;
      for (const auto& s : sets) {
        auto it = by_id.find(s.query_id);
        if (it == by_id.end()) throw Error(ErrorCode::Misalignment, "set for unknown query '" + s.query_id + "'");
        const auto aug = augment(it->second->id, it->second->scores);
        outcomes.push_back(aggregate_majority(s, it->second->answers, aug, ds.pool));
      }
    }
    const auto metrics = evaluate(sets, ds, outcomes);
    Run r("eval", app);
    if (format == "csv") r.write(out, report_io::metrics_csv(metrics));
    else r.write_json(out, report_io::to_json(metrics));
    r.finish(manifest);
  }
};

struct SweepCmd {
  InputFlags input;
  std::string alphas;
  std::string scores = "gap,prob";
  std::size_t trials = 100;
  std::string split = "0.5,0.1,0.4";
  std::uint64_t seed = 0;
  std::string aggregate_spec;
  std::string out;
  std::string format = "json";
  std::string manifest;

  void add(CLI::App& root, std::function<void()>& action, CLI::App*& sub) {
    sub = root.add_subcommand("sweep", "Monte Carlo risk/size sweep over alpha and score kinds");
    input.add(sub, "--input", true);
    sub->add_option("--alphas", alphas, "Comma-separated target risks")->required();
    sub->add_option("--scores", scores, "Comma-separated score kinds");
    sub->add_option("--trials", trials, "Trials per cell");
    sub->add_option("--split", split, "cal,val,test fractions");
    sub->add_option("--seed", seed, "Base seed (trial t uses seed + t)");
    sub->add_option("--aggregate", aggregate_spec, "majority | weighted:<scheme>[@T]");
    sub->add_option("--out", out, "Report path")->required();
    add_output_format(sub, format);
    sub->add_option("--manifest", manifest, "Manifest path");
    action = [this, &sub] { run(*sub); };
  }

  void run(const CLI::App& app) {
    const auto alpha_grid = parse_doubles(alphas);
    std::vector<ScoreKind> kinds;
    for (const auto& k : split_list(scores)) {
      try {
        kinds.push_back(parse_score_kind(k));
      } catch (const Error& e) {
        throw UsageError(e.what());
      }
    }
    if (trials == 0) throw UsageError("--trials must be at least 1");
    TrialOptions options;
    options.threads = thread_budget();
    if (!aggregate_spec.empty()) options.aggregation = parse_aggregation(aggregate_spec);

    const auto ds = input.load();
    const auto table = sweep_alpha(ds, alpha_grid, kinds, trials, parse_split(split, seed), seed, options);
    Run r("sweep", app);
    r.seed("seed", seed);
    if (format == "csv") {
      r.write(out, report_io::sweep_csv(table));
    } else {
      json cells = json::array();
      for (const auto& t : table) cells.push_back(report_io::to_json(t));
      r.write_json(out, json{{"cells", cells}});
    }
    r.finish(manifest);
  }
};

struct CompareCmd {
  InputFlags input;
  std::string calib_path;
  std::optional<double> alpha;
  std::string score = "gap";
  std::string split = "0.5,0.1,0.4";
  std::uint64_t seed = 0;
  std::string aggregate_spec = "majority";
  std::string out;
  std::string format = "json";
  std::string manifest;

  void add(CLI::App& root, std::function<void()>& action, CLI::App*& sub) {
    sub = root.add_subcommand("compare", "Calibrated sets vs. aggregating the whole pool");
    input.add(sub, "--input", true);
    sub->add_option("--calib", calib_path, "CalibrationResult JSON; --input is then the test slice");
    sub->add_option("--alpha", alpha, "Calibrate on a split of --input instead of --calib");
    sub->add_option("--score", score, "Score kind when calibrating")->check(CLI::IsMember({"gap", "prob"}));
    sub->add_option("--split", split, "cal,val,test fractions when calibrating");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--aggregate", aggregate_spec, "majority | weighted:<scheme>[@T]");
    sub->add_option("--out", out, "Report path")->required();
    add_output_format(sub, format);
    sub->add_option("--manifest", manifest, "Manifest path");
    action = [this, &sub] { run(*sub); };
  }

  void run(const CLI::App& app) {
    if (calib_path.empty() == !alpha.has_value()) throw UsageError("give exactly one of --calib or --alpha");
    auto config = parse_aggregation(aggregate_spec);
    const auto ds = input.load();
    Run r("compare", app);
    r.seed("seed", seed);

    RoutingDataset test;
    CalibrationResult calib;
    if (!calib_path.empty()) {
      calib = report_io::calibration_from_json(json::parse(read_file(calib_path)));
      test = ds;
      if (config.method == AggregationMethod::Weighted && !config.temperature)
        throw UsageError("weighted aggregation with --calib needs an explicit @T temperature");
    } else {
      const std::uint64_t split_seed = rng::derive_seed(seed, "split");
      const auto parts = racer::split(ds, parse_split(split, split_seed));
      calib = calibrate_dataset(parts.cal, *alpha, {parse_score_kind(score), smoothing_seed_for(seed)});
      config = resolve_config(config, parts.val, calib);
      test = parts.test;
    }
    const auto cmp = compare_full_ensemble(test, calib, config);
    if (format == "csv") r.write(out, report_io::comparison_csv(cmp));
    else r.write_json(out, json{{"comparison", report_io::to_json(cmp)},
                                {"calibration", report_io::to_json(calib)},
                                {"config", report_io::to_json(config)}});
    r.finish(manifest);
  }
};

struct SelectCmd {
  InputFlags input;
  std::string split = "0.5,0.1,0.4";
  std::uint64_t seed = 0;
  std::string alphas;
  std::string methods = "majority,weighted:router_score";
  std::string score = "gap";
  std::string temperatures;
  std::string out;
  std::string calib_out;
  std::string manifest;

  void add(CLI::App& root, std::function<void()>& action, CLI::App*& sub) {
    sub = root.add_subcommand("select-config", "Grid-search alpha and aggregation on the validation split");
    input.add(sub, "--input", true);
    sub->add_option("--split", split, "cal,val,test fractions");
    sub->add_option("--seed", seed, "Master seed");
    sub->add_option("--alphas", alphas, "Comma-separated alpha grid")->required();
    sub->add_option("--methods", methods, "Comma-separated majority | weighted:<scheme>[@T]");
    sub->add_option("--score", score, "Score kind")->check(CLI::IsMember({"gap", "prob"}));
    sub->add_option("--temperatures", temperatures, "Temperature grid for weighted methods");
    sub->add_option("--out", out, "Selection JSON path")->required();
    sub->add_option("--calib-out", calib_out, "Also write the chosen CalibrationResult JSON");
    sub->add_option("--manifest", manifest, "Manifest path");
    action = nullptr;  // bound in run() to reach the error stream
  }

  void run(const CLI::App& app, std::ostream& err) {
    const auto alpha_grid = parse_doubles(alphas);
    std::vector<AggregationConfig> method_grid;
    // "weighted:confidence:x" contains colons but never commas, so commas split methods.
    for (const auto& m : split_list(methods)) method_grid.push_back(parse_aggregation(m));
    const auto t_grid = temperatures.empty() ? kDefaultTemperatureGrid : parse_doubles(temperatures);

    const auto ds = input.load();
    const std::uint64_t split_seed = rng::derive_seed(seed, "split");
    const auto parts = racer::split(ds, parse_split(split, split_seed));
    const auto sel = select_config(parts.val, parts.cal, alpha_grid, method_grid, parse_score_kind(score), seed, t_grid);
    for (double a : sel.skipped_alphas)
      err << "warning: skipping alpha=" << json_io::format_double(a) << " (infeasible for n_cal=" << parts.cal.size()
          << ")\n";

    Run r("select-config", app);
    r.seed("seed", seed);
    r.seed("split_seed", split_seed);
    r.seed("smoothing_seed", smoothing_seed_for(seed));
    r.write_json(out, report_io::to_json(sel));
    if (!calib_out.empty()) r.write_json(calib_out, report_io::to_json(sel.calibration));
    r.finish(manifest);
  }
};

}  // namespace

std::string sha256_file(const fs::path& path) {
  const std::string data = read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1)
    throw Error(ErrorCode::Io, "sha256 failed for '" + path.string() + "'");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[digest[i] >> 4];
    out += hex[digest[i] & 0xf];
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Risk-controlled set-valued model routing", "racer"};
  app.require_subcommand(1);

  SynthCmd synth;
  CalibrateCmd calibrate_cmd;
  RouteCmd route;
  EvalCmd eval;
  SweepCmd sweep;
  CompareCmd compare;
  SelectCmd select;
  std::function<void()> actions[7];
  CLI::App* subs[7] = {};
  synth.add(app, actions[0], subs[0]);
  calibrate_cmd.add(app, actions[1], subs[1]);
  route.add(app, actions[2], subs[2]);
  eval.add(app, actions[3], subs[3]);
  sweep.add(app, actions[4], subs[4]);
  compare.add(app, actions[5], subs[5]);
  select.add(app, actions[6], subs[6]);
  actions[6] = [&] { select.run(*subs[6], err); };

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();  // program name
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    for (std::size_t i = 0; i < 7; ++i)
      if (subs[i]->parsed()) actions[i]();
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const AlphaInfeasibleError& e) {
    err << "error: " << e.what() << "\nminimal feasible alpha: 1/(n+1) = "
        << json_io::format_double(e.min_feasible_alpha()) << "\n";
    return kInfeasibleAlpha;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.code() == ErrorCode::KindMismatch || e.code() == ErrorCode::SmoothingMismatch) return kPipelineMismatch;
    return kFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kOk;
}

}  // namespace racer::cli
