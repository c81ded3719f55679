#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "mmce/datagen.hpp"
#include "mmce/eval.hpp"

using namespace mmce;

namespace {

ResponseCurve curve_from(std::vector<double> grid, std::vector<double> orders) {
  ResponseCurve c;
  c.grid = std::move(grid);
  c.orders = std::move(orders);
  c.natural = c.orders.front();
  for (double y : c.orders) c.incremental.push_back(y - c.natural);
  c.attendance.assign(c.grid.size(), 1.0);
  c.orders_pa = c.orders;
  return c;
}

// Holdout where the true gain of a treated row is written directly into its
// orders label and every natural value is zero.
Dataset gains_dataset(const std::vector<double>& gains, std::size_t n_blank = 2) {
  Dataset data;
  data.feature_width = 1;
  std::int64_t id = 0;
  for (std::size_t i = 0; i < n_blank; ++i) {
    Example e;
    e.id = id++;
    e.x = {0.0};
    e.attendance = 0.0;
    e.orders = 0.0;
    data.examples.push_back(e);
  }
  for (double g : gains) {
    Example e;
    e.id = id++;
    e.x = {0.0};
    e.treated = true;
    e.t = 1.0;
    e.attendance = 1.0;
    e.orders = g;
    data.examples.push_back(e);
  }
  return data;
}

}  // namespace

TEST_CASE("sequence monotonicity hand counts") {
  CHECK(sequence_monotonicity(std::vector<double>{1.0, 3.0, 2.0}) ==
        doctest::Approx(2.0 / 3.0));
  CHECK(sequence_monotonicity(std::vector<double>{1.0, 2.0, 3.0}) == 1.0);
  CHECK(sequence_monotonicity(std::vector<double>{3.0, 2.0, 1.0}) ==
        doctest::Approx(1.0 / 3.0));
  CHECK(sequence_monotonicity(std::vector<double>{2.0, 2.0}) == 1.0);  // ties count
  CHECK_THROWS_AS(sequence_monotonicity(std::vector<double>{1.0}), ValidationError);
}

TEST_CASE("monotonicity score averages over curves") {
  const std::vector<double> grid = {0.0, 1.0, 2.0};
  std::vector<ResponseCurve> curves;
  curves.push_back(curve_from(grid, {1.0, 2.0, 3.0}));  // 1.0
  curves.push_back(curve_from(grid, {1.0, 3.0, 2.0}));  // 2/3
  CHECK(monotonicity_score(curves) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
  CHECK_THROWS_AS(monotonicity_score(std::vector<ResponseCurve>{}), ValidationError);
}

TEST_CASE("stratify groups by score and averages the curves") {
  const std::vector<double> grid = {0.0, 1.0};
  std::vector<ResponseCurve> curves;
  curves.push_back(curve_from(grid, {0.0, 4.0}));  // score 0.9 (high)
  curves.push_back(curve_from(grid, {0.0, 2.0}));  // score 0.1 (low)
  curves.push_back(curve_from(grid, {0.0, 6.0}));  // score 0.8 (high)
  curves.push_back(curve_from(grid, {0.0, 8.0}));  // score 0.2 (low)
  const std::vector<double> scores = {0.9, 0.1, 0.8, 0.2};
  const Stratification strat = stratify(curves, scores, 2);
  REQUIRE(strat.strata.size() == 2);
  CHECK(strat.strata[0].count == 2);
  CHECK(strat.strata[0].mean_ability_score == doctest::Approx(0.15));
  CHECK(strat.strata[0].mean_incremental[1] == doctest::Approx(5.0));  // (2+8)/2
  CHECK(strat.strata[1].mean_ability_score == doctest::Approx(0.85));
  CHECK(strat.strata[1].mean_incremental[1] == doctest::Approx(5.0));  // (4+6)/2
  CHECK_THROWS_AS(stratify(curves, scores, 1), ValidationError);
  CHECK_THROWS_AS(stratify(curves, std::vector<double>{0.1}, 2), ValidationError);
}

TEST_CASE("stratification score: clean dominance is 1, a crossing halves it") {
  const std::vector<double> grid = {0.0, 1.0, 2.0};
  std::vector<ResponseCurve> dominant;
  dominant.push_back(curve_from(grid, {0.0, 3.0, 4.0}));  // low ability, big lift
  dominant.push_back(curve_from(grid, {0.0, 1.0, 2.0}));  // high ability, small lift
  CHECK(stratification_score(stratify(dominant, std::vector<double>{0.1, 0.9}, 2)) == 1.0);

  std::vector<ResponseCurve> crossing;
  crossing.push_back(curve_from(grid, {0.0, 3.0, 3.0}));  // low: big early, flat late
  crossing.push_back(curve_from(grid, {0.0, 1.0, 5.0}));  // high: crosses at t=2
  CHECK(stratification_score(stratify(crossing, std::vector<double>{0.1, 0.9}, 2)) == 0.5);
}

TEST_CASE("marginal effect score: concave is 1, convex is 0") {
  const std::vector<double> grid = {0.0, 1.0, 2.0};
  std::vector<ResponseCurve> concave;
  concave.push_back(curve_from(grid, {0.0, 1.0, 1.5}));  // ratios 1.0, 0.75
  concave.push_back(curve_from(grid, {0.0, 2.0, 2.2}));
  CHECK(marginal_effect_score(stratify(concave, std::vector<double>{0.1, 0.9}, 2)) == 1.0);

  std::vector<ResponseCurve> convex;
  convex.push_back(curve_from(grid, {0.0, 0.5, 2.0}));  // ratios 0.5, 1.0
  convex.push_back(curve_from(grid, {0.0, 0.1, 3.0}));
  CHECK(marginal_effect_score(stratify(convex, std::vector<double>{0.1, 0.9}, 2)) == 0.0);
}

TEST_CASE("gini: hand-computed value for a perfect ranking of gains 4,3,2,1") {
  const Dataset data = gains_dataset({4.0, 3.0, 2.0, 1.0});
  const std::vector<double> natural(data.examples.size(), 0.0);
  std::vector<double> inc(data.examples.size(), 0.0);
  for (std::size_t i = 0; i < data.examples.size(); ++i) {
    inc[i] = data.examples[i].orders;  // score equals the true gain
  }
  // Cumulative shares 0.4, 0.7, 0.9, 1.0; trapezoid area 0.625; 2*0.625-1.
  CHECK(gini_from_scores(data, natural, inc) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("gini: reversing the ranking negates the score") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> gdist(0.0, 3.0);
  std::vector<double> gains(300);
  for (double& g : gains) g = gdist(rng);
  const Dataset data = gains_dataset(gains);
  const std::vector<double> natural(data.examples.size(), 0.0);
  std::vector<double> inc(data.examples.size(), 0.0);
  for (std::size_t i = 0; i < data.examples.size(); ++i) inc[i] = data.examples[i].orders;
  const double forward = gini_from_scores(data, natural, inc);
  for (double& s : inc) s = -s;
  const double reversed = gini_from_scores(data, natural, inc);
  CHECK(forward > 0.1);
  CHECK(reversed == doctest::Approx(-forward).epsilon(1e-10));
}

TEST_CASE("gini: random ranking scores near zero") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> gdist(0.0, 3.0);
  std::vector<double> gains(4000);
  for (double& g : gains) g = gdist(rng);
  const Dataset data = gains_dataset(gains);
  const std::vector<double> natural(data.examples.size(), 0.0);
  std::vector<double> inc(data.examples.size(), 0.0);
  for (double& s : inc) s = gdist(rng);  // unrelated to the gains
  CHECK(std::abs(gini_from_scores(data, natural, inc)) < 0.05);
}

TEST_CASE("gini: stratum-matched baseline absorbs natural-value differences") {
  // Treated rows have zero true gain but wildly different natural values; an
  // adversarial score that ranks by natural value must not look like skill.
  Dataset data;
  data.feature_width = 1;
  std::vector<double> natural, inc;
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> vdist(1.0, 9.0);
  for (int i = 0; i < 800; ++i) {
    Example e;
    e.id = i;
    e.x = {0.0};
    const double v = vdist(rng);
    e.treated = (i % 2 == 0);
    e.t = e.treated ? 1.0 : 0.0;
    e.attendance = 1.0;
    e.orders = v;  // observed value is exactly the natural value
    data.examples.push_back(e);
    natural.push_back(v);
    inc.push_back(v);  // adversarial: "incremental" score is the natural value
  }
  CHECK(std::abs(gini_from_scores(data, natural, inc)) < 0.1);
}

TEST_CASE("gini validation") {
  const Dataset data = gains_dataset({1.0, 2.0});
  CHECK_THROWS_AS(gini_from_scores(data, std::vector<double>{0.0}, std::vector<double>{0.0}),
                  ValidationError);
  Dataset no_blank = data;
  no_blank.examples.erase(no_blank.examples.begin(), no_blank.examples.begin() + 2);
  const std::vector<double> z(no_blank.examples.size(), 0.0);
  CHECK_THROWS_AS(gini_from_scores(no_blank, z, z), ValidationError);
}

TEST_CASE("gini_score agrees with the score-fed construction") {
  ModelConfig mc;
  mc.scheme = SchemeKind::Mmce2;
  mc.head = HeadKind::SShaped;
  mc.feature_width = 1;
  mc.hidden = {4};
  mc.grid = TreatmentGrid::uniform(2.0, 0.5);
  const auto model = MmceModel::init(mc, 3);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> gdist(0.0, 3.0);
  std::vector<double> gains(50);
  for (double& g : gains) g = gdist(rng);
  Dataset data = gains_dataset(gains);
  for (Example& e : data.examples) e.x = {gdist(rng)};

  std::vector<double> natural, inc;
  for (const Example& e : data.examples) {
    const auto [n, i] = model.decompose(e.x, e.t);
    natural.push_back(n);
    inc.push_back(i);
  }
  CHECK(gini_score(model, data) == gini_from_scores(data, natural, inc));
}

TEST_CASE("positivity: random assignment leaves no flagged bins") {
  Dataset data;
  data.feature_width = 1;
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> udist(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Example e;
    e.id = i;
    e.x = {udist(rng)};
    e.treated = true;
    e.t = 0.1 + std::round(udist(rng) * 49.0) / 10.0;
    e.attendance = 1.0;
    e.orders = 1.0;
    data.examples.push_back(e);
  }
  const PositivityReport report = positivity_check(data, 10);
  CHECK_FALSE(report.any_flagged());
  CHECK(report.bins.size() == 10);
}

TEST_CASE("positivity: deterministic inverse policy flags narrow-support bins") {
  Dataset data;
  data.feature_width = 1;
  for (int i = 0; i < 1000; ++i) {
    const double u = (static_cast<double>(i) + 0.5) / 1000.0;
    Example e;
    e.id = i;
    e.x = {u};
    e.treated = true;
    e.t = std::max(0.1, std::round((1.0 - u) * 50.0) / 10.0);
    e.attendance = 1.0;
    e.orders = 1.0;
    data.examples.push_back(e);
  }
  const PositivityReport report = positivity_check(data, 20);
  CHECK(report.any_flagged(std::vector<std::size_t>{0}));
  CHECK_THROWS_AS(positivity_check(data, 1), ValidationError);
}

TEST_CASE("eligibility: clean data passes, each failure mode is named") {
  Dataset data;
  data.feature_width = 1;
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> udist(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    Example e;
    e.id = i;
    e.x = {udist(rng)};
    e.treated = (i % 5 != 0);
    e.t = e.treated ? 0.1 + std::round(udist(rng) * 49.0) / 10.0 : 0.0;
    e.attendance = 1.0;
    e.orders = 1.0 + e.t;  // macro curve strictly increasing
    data.examples.push_back(e);
  }
  EligibilityConfig cfg;
  const EligibilityVerdict ok = eligibility_check(data, cfg);
  CHECK(ok.eligible);
  CHECK(ok.macro_monotonicity == 1.0);
  CHECK(ok.reasons.empty());

  Dataset inverted = data;
  for (Example& e : inverted.examples) e.orders = 10.0 - e.t;  // confounded texture
  const EligibilityVerdict bad = eligibility_check(inverted, cfg);
  CHECK_FALSE(bad.eligible);
  REQUIRE_FALSE(bad.reasons.empty());
  CHECK(bad.reasons[0].find("macro") != std::string::npos);

  EligibilityConfig no_sutva = cfg;
  no_sutva.sutva_affirmed = false;
  const EligibilityVerdict sutva = eligibility_check(data, no_sutva);
  CHECK_FALSE(sutva.eligible);
  CHECK(sutva.reasons[0].find("sutva") != std::string::npos);
}

TEST_CASE("eligibility: generated confounded data is rejected, unbiased accepted") {
  GenConfig gc;
  gc.n_riders = 4000;
  gc.feature_width = 2;
  gc.seed = 19;

  gc.bias_strength = 0.9;
  const Generated biased = build_dataset(gc);
  EligibilityConfig cfg;
  const EligibilityVerdict bad = eligibility_check(biased.dataset, cfg);
  CHECK_FALSE(bad.eligible);

  gc.bias_strength = 0.0;
  const Generated fair = build_dataset(gc);
  const EligibilityVerdict good = eligibility_check(fair.dataset, cfg);
  CHECK(good.macro_monotonicity > bad.macro_monotonicity);
  CHECK_FALSE(positivity_check(fair.dataset, cfg.n_bins)
                  .any_flagged(std::vector<std::size_t>{0}));
}
