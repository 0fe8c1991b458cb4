#include "racer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <unordered_set>

#include "racer/error.hpp"
#include "racer/json_io.hpp"
#include "racer/rng.hpp"

namespace racer {

using json_io::ordered_json;

// ---------------------------------------------------------------------------
// ModelPool

ModelPool::ModelPool(std::vector<std::string> names, std::string null_id)
    : names_(std::move(names)), null_id_(std::move(null_id)) {
  if (names_.empty()) throw Error(ErrorCode::InvalidParameter, "model pool must not be empty");
  std::unordered_set<std::string> seen;
  for (const auto& n : names_) {
    if (n == null_id_)
      throw Error(ErrorCode::InvalidParameter, "model name '" + n + "' collides with the null model id");
    if (!seen.insert(n).second)
      throw Error(ErrorCode::InvalidParameter, "duplicate model name '" + n + "'");
  }
}

const std::string& ModelPool::name(std::size_t index) const {
  if (index == names_.size()) return null_id_;
  return names_.at(index);
}

std::optional<std::size_t> ModelPool::index_of(const std::string& name) const {
  auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

bool RoutingDataset::has_confidence_scheme(const std::string& scheme) const {
  return std::any_of(records.begin(), records.end(),
                     [&](const QueryRecord& r) { return r.confidences.count(scheme) > 0; });
}

// ---------------------------------------------------------------------------
// Validation

namespace {

void check_record(const QueryRecord& rec, const ModelPool& pool, const std::string& where) {
  auto fail = [&](const std::string& what) {
    throw Error(ErrorCode::Schema, where + ": " + what);
  };
  if (rec.scores.size() != pool.size())
    fail("expected " + std::to_string(pool.size()) + " scores, got " + std::to_string(rec.scores.size()));
  for (std::size_t k = 0; k < rec.scores.size(); ++k) {
    double s = rec.scores[k];
    if (!std::isfinite(s) || s < 0.0 || s > 1.0)
      fail("score for model '" + pool.name(k) + "' out of range [0,1]: " + json_io::format_double(s));
  }
  for (std::size_t i = 0; i < rec.correct.size(); ++i) {
    if (rec.correct[i] >= pool.size()) fail("correct model index out of range");
    if (i > 0 && rec.correct[i] <= rec.correct[i - 1]) fail("correct models must be unique and ascending");
  }
  for (const auto& [model, _] : rec.answers)
    if (!pool.index_of(model)) fail("unknown model name '" + model + "' in answers");
  for (const auto& [scheme, values] : rec.confidences) {
    for (const auto& [model, c] : values) {
      if (!pool.index_of(model))
        fail("unknown model name '" + model + "' in confidences." + scheme);
      if (!std::isfinite(c) || c < 0.0 || c > 1.0)
        fail("confidence " + scheme + "/" + model + " out of range [0,1]");
    }
  }
}

void minmax_normalize(std::vector<QueryRecord>& records) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& r : records)
    for (double s : r.scores)
      if (std::isfinite(s)) {
        lo = std::min(lo, s);
        hi = std::max(hi, s);
      }
  if (!(lo <= hi)) return;
  for (auto& r : records)
    for (double& s : r.scores) {
      if (!std::isfinite(s)) continue;
      s = hi > lo ? (s - lo) / (hi - lo) : 0.5;
    }
}

std::string line_context(std::size_t line) { return "line " + std::to_string(line); }

void finalize(RoutingDataset& ds, const std::vector<std::size_t>& lines, const LoadOptions& options) {
  if (options.minmax_normalize) minmax_normalize(ds.records);
  std::unordered_set<std::string> ids;
  for (std::size_t i = 0; i < ds.records.size(); ++i) {
    const auto& rec = ds.records[i];
    check_record(rec, ds.pool, line_context(lines[i]));
    if (!ids.insert(rec.id).second)
      throw Error(ErrorCode::DuplicateId, line_context(lines[i]) + ": duplicate record id '" + rec.id + "'");
  }
}

std::vector<std::size_t> resolve_models(const std::vector<std::string>& names, const ModelPool& pool,
                                        const std::string& where) {
  std::set<std::size_t> idx;
  for (const auto& n : names) {
    auto k = pool.index_of(n);
    if (!k) throw Error(ErrorCode::Schema, where + ": unknown model name '" + n + "' in correct_models");
    idx.insert(*k);
  }
  return {idx.begin(), idx.end()};
}

}  // namespace

void validate(const RoutingDataset& dataset) {
  std::unordered_set<std::string> ids;
  for (const auto& rec : dataset.records) {
    check_record(rec, dataset.pool, "record '" + rec.id + "'");
    if (!ids.insert(rec.id).second)
      throw Error(ErrorCode::DuplicateId, "duplicate record id '" + rec.id + "'");
  }
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

const ordered_json& require(const ordered_json& obj, const char* field, const std::string& where) {
  auto it = obj.find(field);
  if (it == obj.end()) throw Error(ErrorCode::Schema, where + ": missing field '" + field + "'");
  return *it;
}

std::string require_string(const ordered_json& v, const std::string& where, const std::string& what) {
  if (!v.is_string()) throw Error(ErrorCode::Schema, where + ": " + what + " must be a string");
  return v.get<std::string>();
}

double require_number(const ordered_json& v, const std::string& where, const std::string& what) {
  if (!v.is_number()) throw Error(ErrorCode::Schema, where + ": " + what + " must be a number");
  return v.get<double>();
}

}  // namespace

RoutingDataset parse_jsonl(std::string_view text, const LoadOptions& options) {
  RoutingDataset ds;
  std::vector<std::size_t> lines;
  bool have_pool = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    const std::string where = line_context(line_no);
    ordered_json obj;
    try {
      obj = ordered_json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(ErrorCode::Parse, where + ": " + e.what());
    }
    if (!obj.is_object()) throw Error(ErrorCode::Parse, where + ": expected a JSON object");

    QueryRecord rec;
    rec.id = require_string(require(obj, "id", where), where, "id");

    const auto& scores = require(obj, "scores", where);
    if (!scores.is_object() || scores.empty())
      throw Error(ErrorCode::Schema, where + ": scores must be a non-empty object");
    if (!have_pool) {
      std::vector<std::string> names;
      for (auto it = scores.begin(); it != scores.end(); ++it) names.push_back(it.key());
      try {
        ds.pool = ModelPool(std::move(names));
      } catch (const Error& e) {
        throw Error(ErrorCode::Schema, where + ": " + e.what());
      }
      have_pool = true;
    }
    rec.scores.assign(ds.pool.size(), std::numeric_limits<double>::quiet_NaN());
    for (auto it = scores.begin(); it != scores.end(); ++it) {
      auto k = ds.pool.index_of(it.key());
      if (!k) throw Error(ErrorCode::Schema, where + ": unknown model name '" + it.key() + "' in scores");
      rec.scores[*k] = require_number(it.value(), where, "score '" + it.key() + "'");
    }
    if (scores.size() != ds.pool.size()) {
      for (std::size_t k = 0; k < ds.pool.size(); ++k)
        if (!scores.contains(ds.pool.name(k)))
          throw Error(ErrorCode::Schema, where + ": missing score for model '" + ds.pool.name(k) + "'");
    }

    const auto& correct = require(obj, "correct_models", where);
    if (!correct.is_array()) throw Error(ErrorCode::Schema, where + ": correct_models must be an array");
    std::vector<std::string> correct_names;
    for (const auto& c : correct) correct_names.push_back(require_string(c, where, "correct_models entry"));
    rec.correct = resolve_models(correct_names, ds.pool, where);

    const auto& answers = require(obj, "answers", where);
    if (!answers.is_object()) throw Error(ErrorCode::Schema, where + ": answers must be an object");
    for (auto it = answers.begin(); it != answers.end(); ++it)
      rec.answers[it.key()] = require_string(it.value(), where, "answer '" + it.key() + "'");

    rec.gold = require_string(require(obj, "gold", where), where, "gold");

    if (auto it = obj.find("confidences"); it != obj.end() && !it->is_null()) {
      if (!it->is_object()) throw Error(ErrorCode::Schema, where + ": confidences must be an object");
      for (auto s = it->begin(); s != it->end(); ++s) {
        if (!s->is_object())
          throw Error(ErrorCode::Schema, where + ": confidences." + s.key() + " must be an object");
        auto& scheme = rec.confidences[s.key()];
        for (auto m = s->begin(); m != s->end(); ++m)
          scheme[m.key()] = require_number(m.value(), where, "confidence '" + m.key() + "'");
      }
    }

    ds.records.push_back(std::move(rec));
    lines.push_back(line_no);
  }
  finalize(ds, lines, options);
  return ds;
}

std::string to_jsonl(const RoutingDataset& dataset) {
  std::string out;
  for (const auto& rec : dataset.records) {
    ordered_json obj;
    obj["id"] = rec.id;
    ordered_json scores = ordered_json::object();
    for (std::size_t k = 0; k < dataset.pool.size(); ++k) scores[dataset.pool.name(k)] = rec.scores[k];
    obj["scores"] = std::move(scores);
    ordered_json correct = ordered_json::array();
    for (auto k : rec.correct) correct.push_back(dataset.pool.name(k));
    obj["correct_models"] = std::move(correct);
    ordered_json answers = ordered_json::object();
    for (const auto& [m, a] : rec.answers) answers[m] = a;
    obj["answers"] = std::move(answers);
    obj["gold"] = rec.gold;
    if (!rec.confidences.empty()) {
      ordered_json conf = ordered_json::object();
      for (const auto& [scheme, values] : rec.confidences) {
        ordered_json v = ordered_json::object();
        for (const auto& [m, c] : values) v[m] = c;
        conf[scheme] = std::move(v);
      }
      obj["confidences"] = std::move(conf);
    }
    out += json_io::dump(obj);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

// RFC 4180 rows: quoted fields may contain commas, doubled quotes and newlines.
std::vector<std::pair<std::size_t, std::vector<std::string>>> csv_rows(std::string_view text) {
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  bool any = false;
  std::size_t line = 1;
  std::size_t row_line = 1;

  auto end_row = [&] {
    row.push_back(std::move(field));
    field.clear();
    bool blank = row.size() == 1 && row[0].empty() && !any;
    if (!blank) rows.emplace_back(row_line, std::move(row));
    row.clear();
    any = false;
  };

  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty()) throw Error(ErrorCode::Parse, line_context(line) + ": stray quote in field");
        quoted = true;
        any = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        any = true;
        break;
      case '\r':
        break;
      case '\n':
        end_row();
        ++line;
        row_line = line;
        break;
      default:
        field += c;
    }
  }
  if (quoted) throw Error(ErrorCode::Parse, line_context(row_line) + ": unterminated quoted field");
  if (!field.empty() || !row.empty() || any) end_row();
  return rows;
}

double parse_double(const std::string& s, const std::string& where, const std::string& what) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw Error(ErrorCode::Parse, where + ": " + what + " is not a number: '" + s + "'");
  return v;
}

}  // namespace

RoutingDataset parse_csv(std::string_view text, const LoadOptions& options) {
  RoutingDataset ds;
  auto rows = csv_rows(text);
  if (rows.empty()) return ds;

  const auto& header = rows.front().second;
  enum class Col { Id, Score, Correct, Answer, Gold, Confidence };
  struct Column {
    Col kind;
    std::string model;
    std::string scheme;
  };
  std::vector<Column> cols;
  std::vector<std::string> names;
  bool has_id = false, has_gold = false;
  for (const auto& h : header) {
    auto prefixed = [&](std::string_view p) { return h.rfind(p, 0) == 0; };
    if (h == "id") {
      cols.push_back({Col::Id, {}, {}});
      has_id = true;
    } else if (h == "gold") {
      cols.push_back({Col::Gold, {}, {}});
      has_gold = true;
    } else if (prefixed("score:")) {
      names.push_back(h.substr(6));
      cols.push_back({Col::Score, h.substr(6), {}});
    } else if (prefixed("correct:")) {
      cols.push_back({Col::Correct, h.substr(8), {}});
    } else if (prefixed("answer:")) {
      cols.push_back({Col::Answer, h.substr(7), {}});
    } else if (prefixed("confidence:")) {
      auto rest = h.substr(11);
      auto colon = rest.rfind(':');
      if (colon == std::string::npos)
        throw Error(ErrorCode::Schema, "header: confidence column must be confidence:<scheme>:<model>");
      cols.push_back({Col::Confidence, rest.substr(colon + 1), rest.substr(0, colon)});
    } else {
      throw Error(ErrorCode::Schema, "header: unrecognized column '" + h + "'");
    }
  }
  if (!has_id) throw Error(ErrorCode::Schema, "header: missing field 'id'");
  if (!has_gold) throw Error(ErrorCode::Schema, "header: missing field 'gold'");
  if (names.empty()) throw Error(ErrorCode::Schema, "header: no score:<model> columns");
  try {
    ds.pool = ModelPool(names);
  } catch (const Error& e) {
    throw Error(ErrorCode::Schema, std::string("header: ") + e.what());
  }
  for (const auto& c : cols)
    if (c.kind != Col::Id && c.kind != Col::Gold && !ds.pool.index_of(c.model))
      throw Error(ErrorCode::Schema, "header: unknown model name '" + c.model + "'");

  std::vector<std::size_t> lines;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [line, cells] = rows[r];
    const std::string where = line_context(line);
    if (cells.size() != cols.size())
      throw Error(ErrorCode::Parse, where + ": expected " + std::to_string(cols.size()) + " fields, got " +
                                        std::to_string(cells.size()));
    QueryRecord rec;
    rec.scores.assign(ds.pool.size(), 0.0);
    std::vector<std::string> correct;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const auto& col = cols[c];
      const auto& cell = cells[c];
      switch (col.kind) {
        case Col::Id: rec.id = cell; break;
        case Col::Gold: rec.gold = cell; break;
        case Col::Score:
          rec.scores[*ds.pool.index_of(col.model)] = parse_double(cell, where, "score:" + col.model);
          break;
        case Col::Correct:
          if (cell == "1") correct.push_back(col.model);
          else if (cell != "0" && !cell.empty())
            throw Error(ErrorCode::Schema, where + ": correct:" + col.model + " must be 0 or 1");
          break;
        case Col::Answer:
          if (!cell.empty()) rec.answers[col.model] = cell;
          break;
        case Col::Confidence:
          if (!cell.empty())
            rec.confidences[col.scheme][col.model] =
                parse_double(cell, where, "confidence:" + col.scheme + ":" + col.model);
          break;
      }
    }
    rec.correct = resolve_models(correct, ds.pool, where);
    ds.records.push_back(std::move(rec));
    lines.push_back(line);
  }
  finalize(ds, lines, options);
  return ds;
}

RoutingDataset load_dataset(const std::filesystem::path& path, DataFormat format, const LoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  return format == DataFormat::Jsonl ? parse_jsonl(text, options) : parse_csv(text, options);
}

// ---------------------------------------------------------------------------
// Splitting

void SplitSpec::validate() const {
  for (double f : {cal_frac, val_frac, test_frac})
    if (!std::isfinite(f) || f < 0.0 || f > 1.0)
      throw Error(ErrorCode::InvalidParameter, "split fractions must lie in [0,1]");
  if (std::abs(cal_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidParameter, "split fractions must sum to 1");
}

std::tuple<std::size_t, std::size_t, std::size_t> split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  // The epsilon absorbs products like 10 * 0.7 = 7.000000000000001 vs 6.999...
  auto take = [n](double f) {
    return std::min(n, static_cast<std::size_t>(std::floor(static_cast<double>(n) * f + 1e-9)));
  };
  std::size_t cal = take(spec.cal_frac);
  std::size_t val = std::min(n - cal, take(spec.val_frac));
  std::size_t test = n - cal - val;
  auto degenerate = [&](double f, std::size_t size, const char* which) {
    if (f > 0.0 && size == 0)
      throw Error(ErrorCode::DegenerateSplit, std::string(which) + " split of " + std::to_string(n) +
                                                  " records would be empty");
  };
  degenerate(spec.cal_frac, cal, "calibration");
  degenerate(spec.val_frac, val, "validation");
  degenerate(spec.test_frac, test, "test");
  return {cal, val, test};
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  const std::uint64_t s = rng::derive_seed(seed, "shuffle");
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = rng::to_index(rng::key(s, i), i);
    std::swap(idx[i - 1], idx[j]);
  }
  return idx;
}

RoutingDataset subset(const RoutingDataset& dataset, std::span<const std::size_t> indices) {
  RoutingDataset out;
  out.pool = dataset.pool;
  out.records.reserve(indices.size());
  for (auto i : indices) out.records.push_back(dataset.records.at(i));
  return out;
}

DatasetSplit split(const RoutingDataset& dataset, const SplitSpec& spec) {
  if (dataset.empty()) throw Error(ErrorCode::InvalidParameter, "cannot split an empty dataset");
  auto [n_cal, n_val, n_test] = split_sizes(dataset.size(), spec);
  auto idx = shuffled_indices(dataset.size(), spec.seed);
  std::span<const std::size_t> all(idx);
  return {subset(dataset, all.subspan(0, n_cal)), subset(dataset, all.subspan(n_cal, n_val)),
          subset(dataset, all.subspan(n_cal + n_val, n_test))};
}

// ---------------------------------------------------------------------------
// Synthetic data

namespace {

std::string zero_pad(std::size_t value, std::size_t width) {
  std::string s = std::to_string(value);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

}  // namespace

std::vector<std::string> synthetic_model_names(std::size_t k) {
  const std::size_t width = std::to_string(k).size();
  std::vector<std::string> names;
  for (std::size_t m = 1; m <= k; ++m) names.push_back("m" + zero_pad(m, width));
  return names;
}

RoutingDataset synthesize(const SynthConfig& config) {
  const std::size_t k = config.model_accuracies.size();
  if (config.n == 0) throw Error(ErrorCode::InvalidParameter, "n must be at least 1");
  if (k == 0) throw Error(ErrorCode::InvalidParameter, "pool size must be at least 1");
  for (double a : config.model_accuracies)
    if (!std::isfinite(a) || a < 0.0 || a > 1.0)
      throw Error(ErrorCode::InvalidParameter, "model accuracies must lie in [0,1]");
  if (!std::isfinite(config.score_sharpness) || config.score_sharpness <= 0.0)
    throw Error(ErrorCode::InvalidParameter, "score sharpness must be positive");
  std::vector<bool> colluding(k, false);
  for (auto m : config.colluding_models) {
    if (m >= k) throw Error(ErrorCode::InvalidParameter, "colluding model index out of range");
    colluding[m] = true;
  }

  RoutingDataset ds;
  ds.pool = ModelPool(synthetic_model_names(k));
  const std::uint64_t correct_seed = rng::derive_seed(config.seed, "correct");
  const std::uint64_t score_seed = rng::derive_seed(config.seed, "score");
  const double exponent = 1.0 / config.score_sharpness;
  const std::size_t id_width = std::max<std::size_t>(6, std::to_string(config.n).size());

  ds.records.reserve(config.n);
  for (std::size_t i = 0; i < config.n; ++i) {
    QueryRecord rec;
    rec.id = "q" + zero_pad(i, id_width);
    rec.gold = "gold";
    rec.scores.resize(k);
    for (std::size_t m = 0; m < k; ++m) {
      const bool correct = rng::to_unit(rng::key(correct_seed, i, m)) < config.model_accuracies[m];
      const double u = std::pow(rng::to_unit(rng::key(score_seed, i, m)), exponent);
      rec.scores[m] = correct ? u : 1.0 - u;
      const auto& name = ds.pool.name(m);
      if (correct) {
        rec.correct.push_back(m);
        rec.answers[name] = "gold";
      } else {
        rec.answers[name] = colluding[m] ? "wrong-shared" : "wrong-" + name;
      }
    }
    ds.records.push_back(std::move(rec));
  }
  return ds;
}

}  // namespace racer
