#include <doctest.h>

#include <algorithm>
#include <random>

#include "oracles.hpp"
#include "racer/error.hpp"
#include "racer/router.hpp"

using namespace racer;

namespace {

CalibrationResult calib(double lambda, ScoreKind kind = ScoreKind::Gap, std::optional<std::uint64_t> seed = {}) {
  CalibrationResult c;
  c.lambda_hat = lambda;
  c.alpha = 0.1;
  c.n = 10;
  c.kind = kind;
  c.smoothing_seed = seed;
  return c;
}

NonconformityRow row(std::string id, std::vector<double> s) { return {std::move(id), std::move(s), ScoreKind::Gap, {}}; }

}  // namespace

TEST_CASE("predict_set: inclusive threshold and abstention") {
  auto a = predict_set(row("a", {0.05, 0.3, 0.7, 0.9}), calib(0.3));
  CHECK(a.members == std::vector<std::size_t>{0, 1});
  CHECK_FALSE(a.abstain);
  CHECK(a.real_size() == 2);

  auto b = predict_set(row("b", {0.8, 0.9, 0.02}), calib(0.1));
  CHECK(b.members == std::vector<std::size_t>{2});
  CHECK(b.contains_null());
  CHECK(b.abstain);
  CHECK(b.real_size() == 0);

  auto c = predict_set(row("c", {0.8, 0.9, 0.5}), calib(0.1));
  CHECK(c.members.empty());
  CHECK(c.abstain);
}

TEST_CASE("predict_set: null model may co-occur with real models") {
  auto s = predict_set(row("a", {0.1, 0.9, 0.05}), calib(0.2));
  CHECK(s.members == std::vector<std::size_t>{0, 2});
  CHECK_FALSE(s.abstain);
  CHECK(s.real_size() == 1);
}

TEST_CASE("predict_set: pipeline mismatches are errors") {
  auto r = row("a", {0.1, 0.2});
  try {
    predict_set(r, calib(0.5, ScoreKind::Prob));
    FAIL("expected KindMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::KindMismatch);
  }
  try {
    predict_set(r, calib(0.5, ScoreKind::Gap, 9));
    FAIL("expected SmoothingMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SmoothingMismatch);
  }
  auto smoothed = smooth(r, 9);
  CHECK_NOTHROW(predict_set(smoothed, calib(0.5, ScoreKind::Gap, 9)));
  CHECK_THROWS(predict_set(smoothed, calib(0.5, ScoreKind::Gap, 10)));
}

TEST_CASE("route_batch: order, empty batch, error context") {
  std::vector<NonconformityRow> rows{row("first", {0.1, 0.9}), row("second", {0.9, 0.1})};
  auto sets = route_batch(rows, calib(0.5));
  REQUIRE(sets.size() == 2);
  CHECK(sets[0].query_id == "first");
  CHECK(sets[1].query_id == "second");
  CHECK(route_batch(std::vector<NonconformityRow>{}, calib(0.5)).empty());

  rows.push_back(row("odd", {0.1, 0.2}));
  rows.back().kind = ScoreKind::Prob;
  try {
    route_batch(rows, calib(0.5));
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("odd") != std::string::npos);
  }
}

TEST_CASE("misses: null model covers an empty ground truth") {
  auto with_null = threshold_set(row("a", {0.9, 0.1}), 0.2);
  auto without_null = threshold_set(row("a", {0.1, 0.9}), 0.2);
  CHECK_FALSE(misses(with_null, std::vector<std::size_t>{}));
  CHECK(misses(without_null, std::vector<std::size_t>{}));
  CHECK_FALSE(misses(without_null, std::vector<std::size_t>{0}));
  CHECK(misses(with_null, std::vector<std::size_t>{0}));
}

TEST_CASE("member_names uses the null id") {
  ModelPool pool({"A", "B"});
  auto s = threshold_set(row("a", {0.1, 0.9, 0.0}), 0.5);
  CHECK(member_names(s, pool) == std::vector<std::string>{"A", "__null__"});
}

TEST_CASE("property: nested sets and monotone loss") {
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 3000; ++trial) {
    const std::size_t k = 1 + gen() % 6;
    std::vector<double> s(k + 1);
    for (double& x : s) x = u(gen);
    std::vector<std::size_t> g;
    for (std::size_t m = 0; m < k; ++m)
      if (gen() % 3 == 0) g.push_back(m);
    double l1 = u(gen), l2 = u(gen);
    if (l1 > l2) std::swap(l1, l2);
    auto r = row("q", s);
    auto small = threshold_set(r, l1);
    auto large = threshold_set(r, l2);
    CHECK(std::includes(large.members.begin(), large.members.end(), small.members.begin(), small.members.end()));
    CHECK(misses(large, g) <= misses(small, g));
    CHECK(misses(small, g) == oracle::brute_miss(s, g, l1));
  }
}

TEST_CASE("coverage and risk are complementary over a batch") {
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t miss = 0, cover = 0;
  const std::size_t n = 500;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> s(4);
    for (double& x : s) x = u(gen);
    std::vector<std::size_t> g;
    if (gen() % 2) g.push_back(gen() % 3);
    auto set = threshold_set(row("q", s), 0.4);
    if (misses(set, g)) ++miss;
    if (!misses(set, g)) ++cover;
  }
  CHECK(static_cast<double>(miss) / n == 1.0 - static_cast<double>(cover) / n);
}
