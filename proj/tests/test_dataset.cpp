#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "racer/dataset.hpp"
#include "racer/error.hpp"

using namespace racer;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected racer::Error");
  return ErrorCode::Io;
}

const char* kTwoRecords =
    R"({"id":"q1","scores":{"A":0.9,"B":0.3},"correct_models":["A"],"answers":{"A":"x","B":"y"},"gold":"x"})"
    "\n"
    R"({"id":"q2","scores":{"B":0.2,"A":0.4},"correct_models":[],"answers":{"A":"z","B":"y"},"gold":"x","confidences":{"ptrue":{"A":0.7}}})"
    "\n";

RoutingDataset numbered(std::size_t n) {
  RoutingDataset ds;
  ds.pool = ModelPool({"a"});
  for (std::size_t i = 0; i < n; ++i) ds.records.push_back({"r" + std::to_string(i), {0.5}, {}, {}, "g", {}});
  return ds;
}

}  // namespace

TEST_CASE("load: single JSONL record") {
  auto ds = parse_jsonl(R"({"id":"q1","scores":{"A":0.9,"B":0.3},"correct_models":["A"],"answers":{},"gold":"g"})");
  CHECK(ds.pool.size() == 2);
  CHECK(ds.pool.names() == std::vector<std::string>{"A", "B"});
  REQUIRE(ds.size() == 1);
  CHECK(ds.records[0].scores == std::vector<double>{0.9, 0.3});
  CHECK(ds.records[0].correct == std::vector<std::size_t>{0});
}

TEST_CASE("load: pool order comes from the first record, later records may reorder keys") {
  auto ds = parse_jsonl(kTwoRecords);
  REQUIRE(ds.size() == 2);
  CHECK(ds.records[1].scores == std::vector<double>{0.4, 0.2});
  CHECK(ds.records[1].correct.empty());
  CHECK(ds.records[1].confidences.at("ptrue").at("A") == 0.7);
  CHECK(ds.has_confidence_scheme("ptrue"));
  CHECK_FALSE(ds.has_confidence_scheme("verbal"));
}

TEST_CASE("load: empty input is an empty dataset") {
  CHECK(parse_jsonl("").empty());
  CHECK(parse_jsonl("\n\n").empty());
  CHECK(parse_csv("").empty());
}

TEST_CASE("load: schema violations") {
  CHECK(code_of([] {
          parse_jsonl(R"({"id":"q","scores":{"A":1.5},"correct_models":[],"answers":{},"gold":"g"})");
        }) == ErrorCode::Schema);
  CHECK(code_of([] { parse_jsonl(R"({"id":"q","scores":{"A":0.5},"answers":{},"gold":"g"})"); }) ==
        ErrorCode::Schema);
  CHECK(code_of([] {
          parse_jsonl(R"({"id":"q","scores":{"A":0.5},"correct_models":["Z"],"answers":{},"gold":"g"})");
        }) == ErrorCode::Schema);
  CHECK(code_of([] {
          parse_jsonl(R"({"id":"q","scores":{"A":0.5},"correct_models":[],"answers":{},"gold":"g"})"
                      "\n"
                      R"({"id":"r","scores":{"A":0.5,"B":0.1},"correct_models":[],"answers":{},"gold":"g"})");
        }) == ErrorCode::Schema);
  CHECK(code_of([] {
          parse_jsonl(R"({"id":"q","scores":{"A":0.5},"correct_models":[],"answers":{},"gold":"g","confidences":{"p":{"B":0.5}}})");
        }) == ErrorCode::Schema);
  CHECK(code_of([] {
          parse_jsonl(R"({"id":"q","scores":{"__null__":0.5},"correct_models":[],"answers":{},"gold":"g"})");
        }) == ErrorCode::Schema);
}

TEST_CASE("load: parse errors carry the line number") {
  try {
    parse_jsonl(std::string(kTwoRecords) + "{not json\n");
    FAIL("expected ParseError");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}

TEST_CASE("load: duplicate ids") {
  const std::string line = R"({"id":"q","scores":{"A":0.5},"correct_models":[],"answers":{},"gold":"g"})";
  CHECK(code_of([&] { parse_jsonl(line + "\n" + line); }) == ErrorCode::DuplicateId);
}

TEST_CASE("load: min-max normalization is opt-in") {
  const std::string text =
      R"({"id":"a","scores":{"A":2.0,"B":-2.0},"correct_models":[],"answers":{},"gold":"g"})"
      "\n"
      R"({"id":"b","scores":{"A":0.0,"B":1.0},"correct_models":[],"answers":{},"gold":"g"})";
  CHECK(code_of([&] { parse_jsonl(text); }) == ErrorCode::Schema);
  auto ds = parse_jsonl(text, LoadOptions{true});
  CHECK(ds.records[0].scores == std::vector<double>{1.0, 0.0});
  CHECK(ds.records[1].scores == std::vector<double>{0.5, 0.75});
}

TEST_CASE("load: CSV matches JSONL") {
  const std::string csv =
      "id,score:A,score:B,correct:A,correct:B,answer:A,answer:B,gold,confidence:ptrue:A\n"
      "q1,0.9,0.3,1,0,x,y,x,\n"
      "q2,0.4,0.2,0,0,z,\"y\",x,0.7\n";
  auto from_csv = parse_csv(csv);
  auto from_jsonl = parse_jsonl(kTwoRecords);
  CHECK(from_csv.pool == from_jsonl.pool);
  CHECK(from_csv.records == from_jsonl.records);
}

TEST_CASE("load: CSV quoting and errors") {
  auto ds = parse_csv("id,score:A,answer:A,gold\nq,0.5,\"a, \"\"quoted\"\"\",g\n");
  CHECK(ds.records[0].answers.at("A") == "a, \"quoted\"");
  CHECK(code_of([] { parse_csv("id,score:A,gold\nq,abc,g\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_csv("id,score:A,gold\nq,0.5\n"); }) == ErrorCode::Parse);
  CHECK(code_of([] { parse_csv("id,score:A,gold,correct:B\nq,0.5,g,1\n"); }) == ErrorCode::Schema);
  CHECK(code_of([] { parse_csv("score:A,gold\n0.5,g\n"); }) == ErrorCode::Schema);
}

TEST_CASE("load: JSONL serialization round-trips") {
  auto ds = synthesize({50, {0.7, 0.4, 0.2}, 3.0, 11, {}});
  ds.records[3].confidences["ptrue"]["m1"] = 0.25;
  auto back = parse_jsonl(to_jsonl(ds));
  CHECK(back.pool == ds.pool);
  CHECK(back.records == ds.records);
}

TEST_CASE("load: fuzzed lines either load valid records or raise racer::Error") {
  const std::string base =
      R"({"id":"q1","scores":{"A":0.9,"B":0.3},"correct_models":["A"],"answers":{"A":"x","B":"y"},"gold":"x","confidences":{"p":{"A":0.5}}})";
  const std::string alphabet = "{}[]\":,0123456789.-eABnul \\";
  std::mt19937_64 gen(1234);
  std::size_t accepted = 0;
  for (int trial = 0; trial < 3000; ++trial) {
    std::string line = base;
    const int edits = 1 + static_cast<int>(gen() % 3);
    for (int e = 0; e < edits; ++e) {
      const std::size_t pos = gen() % line.size();
      switch (gen() % 3) {
        case 0: line[pos] = alphabet[gen() % alphabet.size()]; break;
        case 1: line.erase(pos, 1); break;
        default: line.insert(pos, 1, alphabet[gen() % alphabet.size()]);
      }
    }
    try {
      auto ds = parse_jsonl(line);
      validate(ds);
      for (const auto& r : ds.records)
        for (double s : r.scores) CHECK((s >= 0.0 && s <= 1.0));
      ++accepted;
    } catch (const Error&) {
    }
  }
  CHECK(accepted > 0);
}

TEST_CASE("split: floor sizes with remainder to test") {
  auto ds = numbered(10);
  auto parts = split(ds, {0.5, 0.1, 0.4, 7});
  CHECK(parts.cal.size() == 5);
  CHECK(parts.val.size() == 1);
  CHECK(parts.test.size() == 4);
  CHECK(split_sizes(11, {0.5, 0.1, 0.4, 0}) == std::tuple<std::size_t, std::size_t, std::size_t>{5, 1, 5});
}

TEST_CASE("split: deterministic for a seed") {
  auto ds = numbered(40);
  auto ids = [](const RoutingDataset& d) {
    std::vector<std::string> out;
    for (const auto& r : d.records) out.push_back(r.id);
    return out;
  };
  auto a = split(ds, {0.5, 0.1, 0.4, 7});
  auto b = split(ds, {0.5, 0.1, 0.4, 7});
  auto c = split(ds, {0.5, 0.1, 0.4, 8});
  CHECK(ids(a.cal) == ids(b.cal));
  CHECK(ids(a.val) == ids(b.val));
  CHECK(ids(a.test) == ids(b.test));
  CHECK(ids(a.cal) != ids(c.cal));
}

TEST_CASE("split: degenerate and invalid specs") {
  CHECK(code_of([] { split(numbered(3), {0.5, 0.1, 0.4, 0}); }) == ErrorCode::DegenerateSplit);
  CHECK(code_of([] { split(numbered(10), {0.5, 0.1, 0.3, 0}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { split(numbered(10), {1.2, -0.2, 0.0, 0}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { split(numbered(0), {0.5, 0.1, 0.4, 0}); }) == ErrorCode::InvalidParameter);
  auto parts = split(numbered(4), {1.0, 0.0, 0.0, 3});
  CHECK(parts.cal.size() == 4);
  CHECK(parts.test.empty());
}

TEST_CASE("split: always a partition") {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 10 + gen() % 200;
    auto ds = numbered(n);
    auto parts = split(ds, {0.5, 0.2, 0.3, gen()});
    std::multiset<std::string> all;
    for (const auto* part : {&parts.cal, &parts.val, &parts.test})
      for (const auto& r : part->records) all.insert(r.id);
    std::set<std::string> unique(all.begin(), all.end());
    CHECK(all.size() == n);
    CHECK(unique.size() == n);
  }
}

TEST_CASE("synthesize: degenerate accuracies") {
  auto all = synthesize({200, {1.0, 1.0, 1.0}, 4.0, 3, {}});
  for (const auto& r : all.records) CHECK(r.correct == std::vector<std::size_t>{0, 1, 2});
  auto none = synthesize({200, {0.0, 0.0}, 4.0, 3, {}});
  for (const auto& r : none.records) {
    CHECK(r.correct.empty());
    CHECK(r.answers.at("m1") == "wrong-m1");
  }
}

TEST_CASE("synthesize: empirical correctness tracks the targets") {
  const std::vector<double> target{0.7, 0.5, 0.3};
  auto ds = synthesize({10000, target, 4.0, 2024, {}});
  std::vector<std::size_t> hits(3, 0);
  for (const auto& r : ds.records)
    for (std::size_t m = 0; m < 3; ++m)
      if (r.answers.at(ds.pool.name(m)) == r.gold) ++hits[m];
  for (std::size_t m = 0; m < 3; ++m) CHECK(std::abs(static_cast<double>(hits[m]) / 10000.0 - target[m]) <= 0.02);
}

TEST_CASE("synthesize: reproducible and seed-sensitive") {
  SynthConfig cfg{300, {0.6, 0.4}, 2.5, 17, {}};
  CHECK(to_jsonl(synthesize(cfg)) == to_jsonl(synthesize(cfg)));
  auto other = cfg;
  other.seed = 18;
  CHECK(to_jsonl(synthesize(cfg)) != to_jsonl(synthesize(other)));
}

TEST_CASE("synthesize: scores concentrate by correctness") {
  auto ds = synthesize({4000, {0.5, 0.5}, 8.0, 5, {}});
  double correct_sum = 0, wrong_sum = 0;
  std::size_t nc = 0, nw = 0;
  for (const auto& r : ds.records)
    for (std::size_t m = 0; m < 2; ++m) {
      bool ok = std::find(r.correct.begin(), r.correct.end(), m) != r.correct.end();
      (ok ? correct_sum : wrong_sum) += r.scores[m];
      ++(ok ? nc : nw);
    }
  // E[u^(1/8)] = 8/9 for correct models, 1/9 for incorrect ones.
  CHECK(correct_sum / nc == doctest::Approx(8.0 / 9.0).epsilon(0.02));
  CHECK(wrong_sum / nw == doctest::Approx(1.0 / 9.0).epsilon(0.05));
}

TEST_CASE("synthesize: colluding models share a wrong answer") {
  auto ds = synthesize({500, {0.9, 0.0, 0.0}, 4.0, 1, {1, 2}});
  for (const auto& r : ds.records) {
    CHECK(r.answers.at("m2") == "wrong-shared");
    CHECK(r.answers.at("m3") == "wrong-shared");
  }
}

TEST_CASE("synthesize: parameter validation") {
  CHECK(code_of([] { synthesize({0, {0.5}, 1.0, 0, {}}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { synthesize({5, {}, 1.0, 0, {}}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { synthesize({5, {1.5}, 1.0, 0, {}}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { synthesize({5, {0.5}, 0.0, 0, {}}); }) == ErrorCode::InvalidParameter);
  CHECK(code_of([] { synthesize({5, {0.5}, 1.0, 0, {3}}); }) == ErrorCode::InvalidParameter);
}

TEST_CASE("synthetic model names sort in pool order") {
  auto names = synthetic_model_names(12);
  CHECK(names.front() == "m01");
  CHECK(std::is_sorted(names.begin(), names.end()));
}
