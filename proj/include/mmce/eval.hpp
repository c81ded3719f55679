#pragma once

// Prior-based evaluation: monotonicity / stratification / marginal-effect
// scores, a gini over observed incremental gains, positivity support checks,
// and the eligibility verdict for using observational data as an eval set.

#include <span>
#include <string>
#include <vector>

#include "mmce/model.hpp"
#include "mmce/train.hpp"

namespace mmce {

struct Stratification {
  std::vector<double> grid;
  struct Stratum {
    std::size_t count = 0;
    double mean_ability_score = 0.0;
    std::vector<double> mean_total;
    std::vector<double> mean_incremental;
  };
  std::vector<Stratum> strata;  // ordered low -> high ability
};

// Groups curves into K equal-size strata by the supplied ability score.
Stratification stratify(std::span<const ResponseCurve> curves,
                        std::span<const double> ability_scores, std::size_t k);

// Fraction of ordered adjacent pairs with the first level auto-counted, so a
// fully monotone sequence scores exactly 1.
double sequence_monotonicity(std::span<const double> values);

double monotonicity_score(std::span<const ResponseCurve> curves);
double stratification_score(const Stratification& strat);
double marginal_effect_score(const Stratification& strat);

struct PositivityReport {
  struct Bin {
    std::size_t feature = 0;
    std::size_t bin = 0;
    std::size_t count = 0;
    std::vector<int> deciles;  // distinct observed treatment deciles
    bool flagged = false;      // fewer than 2 distinct deciles
  };
  std::vector<Bin> bins;

  bool any_flagged(std::span<const std::size_t> features) const;
  bool any_flagged() const;
};

PositivityReport positivity_check(const Dataset& data, std::size_t n_bins);

struct EligibilityVerdict {
  bool eligible = false;
  double macro_monotonicity = 0.0;
  std::vector<std::string> reasons;
};

struct EligibilityConfig {
  std::vector<std::size_t> important_features = {0};
  std::size_t n_bins = 10;
  double monotonicity_threshold = 0.9;
  bool sutva_affirmed = true;  // business attestation, not testable from data
};

EligibilityVerdict eligibility_check(const Dataset& data, const EligibilityConfig& cfg);

struct GiniConfig {
  std::size_t n_strata = 10;  // baseline-matching strata on predicted natural value
};

// Ranks treated rows by predicted incremental orders at the observed t and
// integrates the normalized cumulative observed-gain curve; gains are observed
// orders minus a stratum-matched blank-group mean baseline.
double gini_score(const MmceModel& model, const Dataset& holdout,
                  const GiniConfig& cfg = {});

// Same construction fed external ranking scores (oracle route for tests).
double gini_from_scores(const Dataset& holdout, std::span<const double> natural_scores,
                        std::span<const double> incremental_scores, const GiniConfig& cfg = {});

struct EvalReport {
  double monotonicity = 0.0;
  double stratification = 0.0;
  double marginal_effect = 0.0;
  double gini = 0.0;
  std::size_t flagged_bins = 0;
  EligibilityVerdict verdict;
  double curve_mae_vs_truth = -1.0;  // -1 when no ground truth supplied
};

}  // namespace mmce
