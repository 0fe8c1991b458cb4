#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "racer/calibration.hpp"
#include "racer/error.hpp"

using namespace racer;

namespace {

std::vector<CriticalScore> criticals(const std::vector<double>& s) {
  std::vector<CriticalScore> out;
  for (std::size_t i = 0; i < s.size(); ++i) out.push_back({"q" + std::to_string(i), s[i], false});
  return out;
}

NonconformityRow row(std::string id, std::vector<double> s) { return {std::move(id), std::move(s), ScoreKind::Gap, {}}; }

std::vector<double> random_scores(std::mt19937_64& gen, std::size_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(n);
  for (double& x : s) {
    x = u(gen);
    if (gen() % 5 == 0) x = std::round(x * 4) / 4;  // occasional exact ties
  }
  return s;
}

}  // namespace

TEST_CASE("critical_scores: minimum over G, null model when G is empty") {
  std::vector<NonconformityRow> rows{row("a", {0.1, 0.5, 0.2, 0.9}), row("b", {0.4, 0.6, 0.05}),
                                     row("c", {0.3, 0.9})};
  std::vector<GroundTruth> gt{{"a", {1, 2}}, {"b", {}}, {"c", {0}}};
  auto cs = critical_scores(rows, gt);
  REQUIRE(cs.size() == 3);
  CHECK(cs[0].s_min == 0.2);
  CHECK_FALSE(cs[0].gt_was_empty);
  CHECK(cs[1].s_min == 0.05);
  CHECK(cs[1].gt_was_empty);
  CHECK(cs[2].s_min == 0.3);
}

TEST_CASE("critical_scores: missing row") {
  std::vector<NonconformityRow> rows{row("a", {0.1, 0.9})};
  std::vector<GroundTruth> gt{{"b", {0}}};
  try {
    critical_scores(rows, gt);
    FAIL("expected MissingRow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingRow);
    CHECK(std::string(e.what()).find("'b'") != std::string::npos);
  }
}

TEST_CASE("calibrate: worked examples") {
  auto nine = criticals({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9});
  auto r = calibrate(nine, 0.2);
  CHECK(r.lambda_hat == 0.8);
  CHECK(r.empirical_exceedances == 1);
  CHECK(r.n == 9);
  CHECK(oracle::scan_threshold({0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9}, 0.2) == 0.8);

  auto three = criticals({0.6, 0.2, 0.4});
  CHECK(calibrate(three, 0.5).lambda_hat == 0.4);
  CHECK(oracle::scan_threshold({0.6, 0.2, 0.4}, 0.5) == 0.4);
}

TEST_CASE("calibrate: infeasible alpha and empty input") {
  auto five = criticals({0.1, 0.2, 0.3, 0.4, 0.5});
  try {
    calibrate(five, 0.1);
    FAIL("expected AlphaInfeasible");
  } catch (const AlphaInfeasibleError& e) {
    CHECK(e.code() == ErrorCode::AlphaInfeasible);
    CHECK(e.min_feasible_alpha() == doctest::Approx(1.0 / 6.0));
  }
  // Exactly 1/(n+1) is feasible and keeps every score inside.
  CHECK(calibrate(five, 1.0 / 6.0).lambda_hat == 0.5);
  CHECK_THROWS_AS(calibrate(std::vector<CriticalScore>{}, 0.1), Error);
  CHECK_THROWS_AS(calibrate(five, 0.0), Error);
  CHECK_THROWS_AS(calibrate(five, 1.0), Error);
}

TEST_CASE("calibrate: carries pipeline metadata") {
  auto r = calibrate(criticals({0.1, 0.2, 0.3}), 0.5, {ScoreKind::Prob, 77});
  CHECK(r.kind == ScoreKind::Prob);
  CHECK(r.smoothing_seed == std::optional<std::uint64_t>(77));
  CHECK(r.pipeline().smoothing_seed == r.smoothing_seed);
}

TEST_CASE("property: calibrate equals exhaustive scan, with the feasibility invariant") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t n = 1 + gen() % 50;
    auto s = random_scores(gen, n);
    const double lo = 1.0 / static_cast<double>(n + 1);
    const double alpha = lo + (0.9 - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    if (alpha >= 0.9) continue;
    auto r = calibrate(criticals(s), alpha);
    auto want = oracle::scan_threshold(s, alpha);
    REQUIRE(want.has_value());
    CHECK(r.lambda_hat == *want);
    CHECK((1.0 + static_cast<double>(r.empirical_exceedances)) / (n + 1.0) <= alpha);
  }
}

TEST_CASE("property: order-statistic identity") {
  std::mt19937_64 gen(32);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 5 + gen() % 200;
    std::vector<double> s(n);
    for (double& x : s) x = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
    const double alpha = std::uniform_real_distribution<double>(1.0 / (n + 1.0), 0.95)(gen);
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end());
    // Integer form of ceil((n+1)(1-alpha)) taken at the feasibility boundary.
    std::size_t k = 0;
    while (k + 1 <= n && (2.0 + k) / (n + 1.0) <= alpha) ++k;
    const std::size_t index = n - k;  // 1-based order statistic
    CHECK(index == static_cast<std::size_t>(std::ceil((n + 1.0) * (1.0 - alpha) - 1e-9)));
    CHECK(calibrate(criticals(s), alpha).lambda_hat == sorted[index - 1]);
  }
}

TEST_CASE("property: monotone in alpha and in the empirical distribution") {
  std::mt19937_64 gen(33);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 10 + gen() % 40;
    auto s = random_scores(gen, n);
    std::uniform_real_distribution<double> ua(1.0 / (n + 1.0), 0.99);
    double a1 = ua(gen), a2 = ua(gen);
    if (a1 > a2) std::swap(a1, a2);
    const double l1 = calibrate(criticals(s), a1).lambda_hat;
    const double l2 = calibrate(criticals(s), a2).lambda_hat;
    CHECK(l1 >= l2);

    auto more = s;
    more.push_back(2.0);
    const double alpha = ua(gen);
    CHECK(calibrate(criticals(more), alpha).lambda_hat >= calibrate(criticals(s), alpha).lambda_hat);

    auto fewer = s;
    fewer.erase(std::max_element(fewer.begin(), fewer.end()));
    if (alpha >= 1.0 / fewer.size()) {
      CHECK(calibrate(criticals(fewer), alpha).lambda_hat <= calibrate(criticals(s), alpha).lambda_hat);
    }
  }
}
