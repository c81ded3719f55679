#pragma once

// Catalog of monotone-in-treatment response functions. Sign-constrained
// parameters go through softplus so monotonicity holds by construction for
// any raw parameter vector.

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

#include "mmce/errors.hpp"

namespace mmce {

enum class HeadKind { Linear, Logarithmic, SShaped, IsotonicEncodingLR };

HeadKind head_kind_from_name(std::string_view name);  // "linear"|"log"|"sshaped"|"isotonic"
std::string_view head_kind_name(HeadKind kind);

struct HeadHyper {
  double ceiling = 5.0;   // D, SShaped only
  int max_treatment = 9;  // N, IsotonicEncodingLR only
};

struct HeadParams {
  HeadKind kind;
  // Linear/Logarithmic: {a, b} with a >= 0.
  // SShaped: {a, b} with a >= 0; ceiling D is a fixed hyperparameter.
  // IsotonicEncodingLR: w of length N+1, all >= 0.
  std::vector<double> values;
  HeadHyper hyper;
};

// Grid of treatment values: starts at 0, strictly ascending, 0.1 resolution.
struct TreatmentGrid {
  std::vector<double> levels;

  static TreatmentGrid uniform(double t_max, double step = 0.1);
  void validate() const;
  std::size_t size() const { return levels.size(); }
};

// Number of raw parameters the backbone must emit for a head.
std::size_t head_param_count(HeadKind kind, const HeadHyper& hyper);

// Softplus on sign-constrained entries, pass-through on the rest.
// constrain_intercept additionally constrains b >= 0 (used for value-scale
// orders heads where the output must stay non-negative).
HeadParams param_transform(std::span<const double> raw, HeadKind kind,
                           const HeadHyper& hyper, bool constrain_intercept = false);

double head_eval(const HeadParams& params, double t);
double head_delta(const HeadParams& params, double t);  // head_eval(t) - head_eval(0)

// Cumulative 0/1 encoding: position i is 1 iff i <= t.
std::vector<double> isotonic_encode(int t, int n);

bool check_monotone(const HeadParams& params, const TreatmentGrid& grid);

double softplus(double x);
double sigmoid(double x);

}  // namespace mmce
