#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "racer/error.hpp"
#include "racer/router.hpp"
#include "racer/scoring.hpp"

using namespace racer;

namespace {

std::vector<double> v(std::initializer_list<double> xs) { return xs; }

void check_near(const std::vector<double>& got, const std::vector<double>& want) {
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

}  // namespace

TEST_CASE("augment: appends 1 - max") {
  check_near(augment("q", v({0.9, 0.3})).r, {0.9, 0.3, 0.1});
  check_near(augment("q", v({1.0, 0.2})).r, {1.0, 0.2, 0.0});
  check_near(augment("q", v({0.0})).r, {0.0, 1.0});
}

TEST_CASE("augment: rejects invalid scores") {
  auto code = [](std::vector<double> s) {
    try {
      augment("q", s);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code({1.2}) == ErrorCode::InvalidScore);
  CHECK(code({-0.1, 0.5}) == ErrorCode::InvalidScore);
  CHECK(code({std::nan("")}) == ErrorCode::InvalidScore);
  CHECK(code({}) == ErrorCode::InvalidScore);
}

TEST_CASE("nonconformity: gap and prob") {
  auto row = augment("q", v({0.9, 0.3}));
  check_near(nonconformity(row, ScoreKind::Gap).s, {0.0, 0.6, 0.8});
  check_near(nonconformity(row, ScoreKind::Prob).s, {0.1, 0.7, 0.9});
  AugmentedScoreRow tie{"t", {0.5, 0.5, 0.5}};
  CHECK(nonconformity(tie, ScoreKind::Gap).s == v({0.0, 0.0, 0.0}));
}

TEST_CASE("nonconformity: gap max is taken over the augmented pool") {
  // Null score 1 - 0.2 = 0.8 dominates both models.
  auto row = augment("q", v({0.2, 0.1}));
  check_near(nonconformity(row, ScoreKind::Gap).s, {0.6, 0.7, 0.0});
}

TEST_CASE("smooth: bounded, deterministic, single use") {
  auto row = nonconformity(augment("q", v({1.0, 0.4})), ScoreKind::Gap);  // s = [0, 0.6, 1]
  auto a = smooth(row, 42);
  auto b = smooth(row, 42);
  CHECK(a.s == b.s);
  CHECK(a.smoothing_seed == std::optional<std::uint64_t>(42));
  CHECK(a.s[0] >= 0.0);
  CHECK(a.s[0] < 1e-6);
  CHECK(a.s[1] >= 0.6);
  CHECK(a.s[1] < 0.6 + 1e-6);
  CHECK(smooth(row, 43).s != a.s);
  try {
    smooth(a, 1);
    FAIL("expected AlreadySmoothed");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AlreadySmoothed);
  }
}

TEST_CASE("smooth: noise depends on the query id") {
  NonconformityRow a{"a", {0.0}, ScoreKind::Gap, std::nullopt};
  NonconformityRow b{"b", {0.0}, ScoreKind::Gap, std::nullopt};
  CHECK(smooth(a, 5).s != smooth(b, 5).s);
}

TEST_CASE("smooth: ties become distinct over many seeds") {
  NonconformityRow tie{"q", {0.0, 0.0, 0.0}, ScoreKind::Gap, std::nullopt};
  std::size_t distinct = 0;
  for (std::uint64_t seed = 0; seed < 10000; ++seed) {
    auto s = smooth(tie, seed).s;
    if (std::set<double>(s.begin(), s.end()).size() == 3) ++distinct;
  }
  CHECK(distinct == 10000);
}

TEST_CASE("property: argmin s equals argmax r before smoothing") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> f(1 + gen() % 6);
    for (double& x : f) x = u(gen);
    auto row = augment("q", f);
    const auto top = std::max_element(row.r.begin(), row.r.end()) - row.r.begin();
    for (auto kind : {ScoreKind::Gap, ScoreKind::Prob}) {
      auto s = nonconformity(row, kind).s;
      CHECK(std::min_element(s.begin(), s.end()) - s.begin() == top);
      if (kind == ScoreKind::Gap) CHECK(*std::min_element(s.begin(), s.end()) == 0.0);
    }
  }
}

TEST_CASE("property: smoothing preserves threshold sets away from scores") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> f(1 + gen() % 6);
    for (double& x : f) x = u(gen);
    auto row = nonconformity(augment("q" + std::to_string(trial), f), ScoreKind::Prob);
    auto smoothed = smooth(row, gen());
    const double lambda = u(gen);
    bool far = std::all_of(row.s.begin(), row.s.end(), [&](double s) { return std::abs(s - lambda) > 1e-6; });
    if (!far) continue;
    CHECK(threshold_set(row, lambda).members == threshold_set(smoothed, lambda).members);
  }
}
