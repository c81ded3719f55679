#include "mmce/eval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace mmce {

namespace {
constexpr double kTol = 1e-12;
}

double sequence_monotonicity(std::span<const double> values) {
  if (values.size() < 2) throw ValidationError("monotonicity needs >= 2 levels");
  std::size_t ordered = 1;  // first level auto-counted
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] >= values[i - 1] - kTol) ++ordered;
  }
  return static_cast<double>(ordered) / static_cast<double>(values.size());
}

double monotonicity_score(std::span<const ResponseCurve> curves) {
  if (curves.empty()) throw ValidationError("no curves");
  const auto& grid = curves.front().grid;
  if (grid.size() < 2) throw ValidationError("monotonicity needs >= 2 grid levels");
  double sum = 0.0;
  for (const ResponseCurve& c : curves) {
    if (c.grid != grid) throw ValidationError("curves on mismatched grids");
    sum += sequence_monotonicity(c.orders);
  }
  return sum / static_cast<double>(curves.size());
}

Stratification stratify(std::span<const ResponseCurve> curves,
                        std::span<const double> ability_scores, std::size_t k) {
  if (k < 2) throw ValidationError("stratification needs K >= 2");
  if (curves.empty() || curves.size() != ability_scores.size()) {
    throw ValidationError("curves/scores size mismatch");
  }
  if (curves.size() < k) throw ValidationError("fewer curves than strata");
  const auto& grid = curves.front().grid;

  std::vector<std::size_t> order(curves.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ability_scores[a] < ability_scores[b];
  });

  Stratification strat;
  strat.grid = grid;
  for (std::size_t s = 0; s < k; ++s) {
    const std::size_t lo = s * curves.size() / k;
    const std::size_t hi = (s + 1) * curves.size() / k;
    if (hi <= lo) throw ValidationError("empty stratum");
    Stratification::Stratum st;
    st.count = hi - lo;
    st.mean_total.assign(grid.size(), 0.0);
    st.mean_incremental.assign(grid.size(), 0.0);
    for (std::size_t i = lo; i < hi; ++i) {
      const ResponseCurve& c = curves[order[i]];
      if (c.grid != grid) throw ValidationError("curves on mismatched grids");
      st.mean_ability_score += ability_scores[order[i]];
      for (std::size_t g = 0; g < grid.size(); ++g) {
        st.mean_total[g] += c.orders[g];
        st.mean_incremental[g] += c.incremental[g];
      }
    }
    const double inv = 1.0 / static_cast<double>(st.count);
    st.mean_ability_score *= inv;
    for (double& v : st.mean_total) v *= inv;
    for (double& v : st.mean_incremental) v *= inv;
    strat.strata.push_back(std::move(st));
  }
  return strat;
}

double stratification_score(const Stratification& strat) {
  const std::size_t k = strat.strata.size();
  if (k < 2) throw ValidationError("stratification needs K >= 2");
  for (const auto& st : strat.strata) {
    if (st.count == 0) throw ValidationError("empty stratum");
  }
  std::size_t hits = 0;
  for (std::size_t s = 0; s < k; ++s) {
    bool dominates = true;
    for (std::size_t h = s + 1; h < k && dominates; ++h) {
      for (std::size_t g = 1; g < strat.grid.size(); ++g) {  // positive levels only
        if (strat.strata[s].mean_incremental[g] <
            strat.strata[h].mean_incremental[g] - kTol) {
          dominates = false;
          break;
        }
      }
    }
    if (dominates) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(k);
}

double marginal_effect_score(const Stratification& strat) {
  if (strat.grid.size() < 3 || strat.grid[1] <= 0.0) {
    throw ValidationError("marginal effect needs >= 2 positive grid levels");
  }
  std::size_t hits = 0;
  for (const auto& st : strat.strata) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t g = 1; g < strat.grid.size(); ++g) {
      best = std::max(best, st.mean_incremental[g] / strat.grid[g]);
    }
    const double lowest = st.mean_incremental[1] / strat.grid[1];
    if (lowest >= best - kTol) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(strat.strata.size());
}

namespace {

// Quantile bin index in [0, n_bins) for v given sorted values.
std::size_t quantile_bin(const std::vector<double>& sorted, double v, std::size_t n_bins) {
  const auto it = std::upper_bound(sorted.begin(), sorted.end(), v);
  const std::size_t rank = static_cast<std::size_t>(it - sorted.begin());
  std::size_t bin = rank * n_bins / (sorted.size() + 1);
  return std::min(bin, n_bins - 1);
}

}  // namespace

PositivityReport positivity_check(const Dataset& data, std::size_t n_bins) {
  if (n_bins < 2) throw ValidationError("positivity needs >= 2 bins");
  if (data.examples.empty()) throw ValidationError("empty dataset");
  PositivityReport report;

  std::vector<double> sorted_t;
  sorted_t.reserve(data.examples.size());
  for (const Example& e : data.examples) sorted_t.push_back(e.t);
  std::sort(sorted_t.begin(), sorted_t.end());

  for (std::size_t f = 0; f < data.feature_width; ++f) {
    std::vector<double> sorted_x;
    sorted_x.reserve(data.examples.size());
    for (const Example& e : data.examples) sorted_x.push_back(e.x[f]);
    std::sort(sorted_x.begin(), sorted_x.end());

    std::vector<std::vector<int>> deciles(n_bins);
    std::vector<std::size_t> counts(n_bins, 0);
    for (const Example& e : data.examples) {
      const std::size_t bin = quantile_bin(sorted_x, e.x[f], n_bins);
      const int dec = static_cast<int>(quantile_bin(sorted_t, e.t, 10));
      counts[bin] += 1;
      auto& d = deciles[bin];
      if (std::find(d.begin(), d.end(), dec) == d.end()) d.push_back(dec);
    }
    for (std::size_t b = 0; b < n_bins; ++b) {
      PositivityReport::Bin bin;
      bin.feature = f;
      bin.bin = b;
      bin.count = counts[b];
      std::sort(deciles[b].begin(), deciles[b].end());
      bin.deciles = std::move(deciles[b]);
      bin.flagged = bin.deciles.size() < 2;
      report.bins.push_back(std::move(bin));
    }
  }
  return report;
}

bool PositivityReport::any_flagged(std::span<const std::size_t> features) const {
  for (const Bin& b : bins) {
    if (b.flagged &&
        std::find(features.begin(), features.end(), b.feature) != features.end()) {
      return true;
    }
  }
  return false;
}

bool PositivityReport::any_flagged() const {
  return std::any_of(bins.begin(), bins.end(), [](const Bin& b) { return b.flagged; });
}

EligibilityVerdict eligibility_check(const Dataset& data, const EligibilityConfig& cfg) {
  if (data.examples.empty()) throw ValidationError("empty dataset");
  EligibilityVerdict verdict;

  const PositivityReport report = positivity_check(data, cfg.n_bins);
  if (report.any_flagged(cfg.important_features)) {
    verdict.reasons.push_back("positivity: degenerate treatment support on important features");
  }

  // Macro check: mean observed orders per treatment decile must be close to
  // monotone, else the data reproduces the confounded-allocation pathology.
  std::vector<double> sorted_t;
  for (const Example& e : data.examples) sorted_t.push_back(e.t);
  std::sort(sorted_t.begin(), sorted_t.end());
  std::vector<double> sum(10, 0.0);
  std::vector<std::size_t> cnt(10, 0);
  for (const Example& e : data.examples) {
    const std::size_t dec = quantile_bin(sorted_t, e.t, 10);
    sum[dec] += e.orders;
    cnt[dec] += 1;
  }
  std::vector<double> macro;
  for (std::size_t d = 0; d < 10; ++d) {
    if (cnt[d] > 0) macro.push_back(sum[d] / static_cast<double>(cnt[d]));
  }
  if (macro.size() < 2) {
    verdict.reasons.push_back("macro: not enough distinct treatment levels");
  } else {
    verdict.macro_monotonicity = sequence_monotonicity(macro);
    if (verdict.macro_monotonicity < cfg.monotonicity_threshold) {
      verdict.reasons.push_back("macro: observed orders-vs-treatment curve fails monotonicity");
    }
  }

  if (!cfg.sutva_affirmed) {
    verdict.reasons.push_back("sutva: not affirmed by caller");
  }

  verdict.eligible = verdict.reasons.empty();
  return verdict;
}

namespace {

double gini_impl(const Dataset& holdout, const std::vector<double>& natural_scores,
                 const std::vector<double>& incremental_scores, std::size_t n_strata) {
  std::vector<std::size_t> blank_rows, treated_rows;
  for (std::size_t i = 0; i < holdout.examples.size(); ++i) {
    (holdout.examples[i].treated ? treated_rows : blank_rows).push_back(i);
  }
  if (blank_rows.empty()) throw ValidationError("gini needs blank rows for the baseline");
  if (treated_rows.size() < 2) throw ValidationError("gini needs >= 2 treated rows");

  // Stratum-matched baseline on the predicted natural value.
  std::vector<double> sorted_nat;
  for (std::size_t i : blank_rows) sorted_nat.push_back(natural_scores[i]);
  for (std::size_t i : treated_rows) sorted_nat.push_back(natural_scores[i]);
  std::sort(sorted_nat.begin(), sorted_nat.end());

  std::vector<double> base_sum(n_strata, 0.0);
  std::vector<std::size_t> base_cnt(n_strata, 0);
  double global_sum = 0.0;
  for (std::size_t i : blank_rows) {
    const std::size_t s = quantile_bin(sorted_nat, natural_scores[i], n_strata);
    base_sum[s] += holdout.examples[i].orders;
    base_cnt[s] += 1;
    global_sum += holdout.examples[i].orders;
  }
  const double global_mean = global_sum / static_cast<double>(blank_rows.size());

  struct Row {
    double score;
    double gain;
  };
  std::vector<Row> rows;
  rows.reserve(treated_rows.size());
  for (std::size_t i : treated_rows) {
    const std::size_t s = quantile_bin(sorted_nat, natural_scores[i], n_strata);
    const double baseline =
        base_cnt[s] > 0 ? base_sum[s] / static_cast<double>(base_cnt[s]) : global_mean;
    rows.push_back({incremental_scores[i], holdout.examples[i].orders - baseline});
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const Row& a, const Row& b) { return a.score > b.score; });

  double total = 0.0;
  for (const Row& r : rows) total += r.gain;
  if (std::abs(total) < 1e-12) return 0.0;

  // Trapezoidal area under the normalized cumulative-gain curve.
  const double n = static_cast<double>(rows.size());
  double cum = 0.0, area = 0.0;
  for (const Row& r : rows) {
    const double prev = cum;
    cum += r.gain / total;
    area += 0.5 * (prev + cum) / n;
  }
  return 2.0 * area - 1.0;
}

}  // namespace

double gini_from_scores(const Dataset& holdout, std::span<const double> natural_scores,
                        std::span<const double> incremental_scores, const GiniConfig& cfg) {
  if (natural_scores.size() != holdout.examples.size() ||
      incremental_scores.size() != holdout.examples.size()) {
    throw ValidationError("score vectors must match dataset rows");
  }
  return gini_impl(holdout, {natural_scores.begin(), natural_scores.end()},
                   {incremental_scores.begin(), incremental_scores.end()}, cfg.n_strata);
}

double gini_score(const MmceModel& model, const Dataset& holdout, const GiniConfig& cfg) {
  std::vector<double> natural(holdout.examples.size());
  std::vector<double> incremental(holdout.examples.size());
  for (std::size_t i = 0; i < holdout.examples.size(); ++i) {
    const Example& e = holdout.examples[i];
    const auto [nat, inc] = model.decompose(e.x, e.t);
    natural[i] = nat;
    incremental[i] = inc;
  }
  return gini_impl(holdout, natural, incremental, cfg.n_strata);
}

}  // namespace mmce
