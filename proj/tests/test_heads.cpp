#include <doctest.h>

#include <cmath>
#include <random>

#include "mmce/heads.hpp"

using namespace mmce;

namespace {

const std::vector<double> kTableWeights = {2, 1, 1.5, 1, 0.7, 0.7, 0.7, 0.5, 0.5, 0.2};

HeadParams table_params() {
  HeadParams p;
  p.kind = HeadKind::IsotonicEncodingLR;
  p.hyper.max_treatment = 9;
  p.values = kTableWeights;
  return p;
}

HeadParams make(HeadKind kind, std::vector<double> values, HeadHyper hyper = {}) {
  HeadParams p;
  p.kind = kind;
  p.values = std::move(values);
  p.hyper = hyper;
  return p;
}

}  // namespace

TEST_CASE("param_transform: softplus at 0 gives ln 2 slope") {
  const auto p = param_transform(std::vector<double>{0.0, 1.5}, HeadKind::Linear, {});
  CHECK(p.values[0] == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(p.values[1] == 1.5);  // intercept passes through
}

TEST_CASE("param_transform: slope strictly positive for any finite raw") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-30.0, 30.0);
  for (int i = 0; i < 200; ++i) {
    const auto p = param_transform(std::vector<double>{dist(rng), dist(rng)},
                                   HeadKind::SShaped, {});
    CHECK(p.values[0] > 0.0);
  }
}

TEST_CASE("param_transform: large negative raw gives near-zero positive slope") {
  const auto p = param_transform(std::vector<double>{-50.0, 0.0}, HeadKind::Linear, {});
  CHECK(p.values[0] > 0.0);
  CHECK(p.values[0] < 1e-20);
}

TEST_CASE("param_transform rejects wrong arity") {
  CHECK_THROWS_AS(param_transform(std::vector<double>{1.0}, HeadKind::Linear, {}),
                  ConfigError);
  HeadHyper hyper;
  hyper.max_treatment = 9;
  CHECK_THROWS_AS(
      param_transform(std::vector<double>(3, 0.0), HeadKind::IsotonicEncodingLR, hyper),
      ConfigError);
}

TEST_CASE("head_eval: sshaped midpoint D/2 at zero exponent") {
  HeadHyper hyper;
  hyper.ceiling = 5.0;
  const auto p = make(HeadKind::SShaped, {1.0, 1.0}, hyper);
  CHECK(head_eval(p, 1.0) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("head_eval: logarithmic at t=0 is the intercept") {
  const auto p = make(HeadKind::Logarithmic, {2.0, 1.0});
  CHECK(head_eval(p, 0.0) == 1.0);
}

TEST_CASE("head_eval: isotonic reproduces the demonstration table bit-exactly") {
  const auto p = table_params();
  const double table[10] = {2.0, 3.0, 4.5, 5.5, 6.2, 6.9, 7.6, 8.1, 8.6, 8.8};
  double running = 0.0;  // independent accumulation of the same weights
  for (int t = 0; t <= 9; ++t) {
    running += kTableWeights[static_cast<std::size_t>(t)];
    CHECK(head_eval(p, static_cast<double>(t)) == running);
    CHECK(head_eval(p, static_cast<double>(t)) == doctest::Approx(table[t]).epsilon(1e-12));
  }
  CHECK(head_eval(p, 2.0) == 4.5);
  CHECK(head_eval(p, 9.0) == doctest::Approx(8.8).epsilon(1e-12));
}

TEST_CASE("head_eval: isotonic rejects out-of-range treatment") {
  CHECK_THROWS_AS(head_eval(table_params(), 10.0), ValidationError);
  CHECK_THROWS_AS(head_eval(table_params(), -1.0), ValidationError);
}

TEST_CASE("isotonic_encode matches the table rows") {
  CHECK(isotonic_encode(0, 9) == std::vector<double>{1, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  CHECK(isotonic_encode(3, 9) == std::vector<double>{1, 1, 1, 1, 0, 0, 0, 0, 0, 0});
  CHECK(isotonic_encode(9, 9) == std::vector<double>(10, 1.0));
  CHECK_THROWS_AS(isotonic_encode(10, 9), ValidationError);
  CHECK_THROWS_AS(isotonic_encode(-1, 9), ValidationError);
}

TEST_CASE("head_delta: zero at t=0 for every kind") {
  HeadHyper hyper;
  hyper.ceiling = 5.0;
  CHECK(head_delta(make(HeadKind::Linear, {2.0, -3.0}), 0.0) == 0.0);
  CHECK(head_delta(make(HeadKind::Logarithmic, {2.0, 1.0}), 0.0) == 0.0);
  CHECK(head_delta(make(HeadKind::SShaped, {1.0, 1.0}, hyper), 0.0) == 0.0);
  CHECK(head_delta(table_params(), 0.0) == 0.0);
}

TEST_CASE("head_delta: table weights at t=2 give 2.5") {
  CHECK(head_delta(table_params(), 2.0) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("head_delta: sshaped matches direct formula evaluation") {
  HeadHyper hyper;
  hyper.ceiling = 5.0;
  const auto p = make(HeadKind::SShaped, {1.0, 1.0}, hyper);
  const double want = 2.5 - 5.0 / (1.0 + std::exp(1.0));
  CHECK(head_delta(p, 1.0) == doctest::Approx(want).epsilon(1e-12));
  CHECK(want == doctest::Approx(1.1553).epsilon(1e-4));
}

TEST_CASE("check_monotone: constraint-satisfying parameters always pass") {
  const TreatmentGrid grid = TreatmentGrid::uniform(5.0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> dist(-5.0, 5.0);
  HeadHyper hyper;
  hyper.ceiling = 4.0;
  hyper.max_treatment = 9;
  for (int i = 0; i < 100; ++i) {
    for (HeadKind kind : {HeadKind::Linear, HeadKind::Logarithmic, HeadKind::SShaped,
                          HeadKind::IsotonicEncodingLR}) {
      std::vector<double> raw(head_param_count(kind, hyper));
      for (double& v : raw) v = dist(rng);
      CHECK(check_monotone(param_transform(raw, kind, hyper), grid));
    }
  }
}

TEST_CASE("check_monotone: forced negative isotonic weight fails") {
  auto p = table_params();
  p.values[3] = -1.0;  // bypasses the transform
  CHECK_FALSE(check_monotone(p, TreatmentGrid::uniform(9.0, 1.0)));
}

TEST_CASE("check_monotone: vanishing steepness gives a constant, still monotone") {
  HeadHyper hyper;
  hyper.ceiling = 5.0;
  CHECK(check_monotone(make(HeadKind::SShaped, {0.0, 1.0}, hyper),
                       TreatmentGrid::uniform(5.0)));
}

TEST_CASE("sshaped output stays inside (0, D)") {
  HeadHyper hyper;
  hyper.ceiling = 3.0;
  std::mt19937_64 rng(29);
  std::uniform_real_distribution<double> dist(-10.0, 10.0);
  for (int i = 0; i < 200; ++i) {
    const auto p =
        param_transform(std::vector<double>{dist(rng), dist(rng)}, HeadKind::SShaped, hyper);
    // open interval mathematically; closed at the edges once sigmoid rounds
    const double y = head_eval(p, std::abs(dist(rng)));
    CHECK(y >= 0.0);
    CHECK(y <= 3.0);
  }
}

TEST_CASE("treatment grid validation") {
  const TreatmentGrid g = TreatmentGrid::uniform(1.0);
  CHECK(g.levels.size() == 11);
  CHECK(g.levels.front() == 0.0);
  CHECK(g.levels.back() == 1.0);
  TreatmentGrid bad;
  bad.levels = {0.1, 0.2};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad.levels = {0.0, 0.2, 0.2};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
