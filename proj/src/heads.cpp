#include "mmce/heads.hpp"

#include <cmath>
#include <string>

namespace mmce {

double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

HeadKind head_kind_from_name(std::string_view name) {
  if (name == "linear") return HeadKind::Linear;
  if (name == "log") return HeadKind::Logarithmic;
  if (name == "sshaped") return HeadKind::SShaped;
  if (name == "isotonic") return HeadKind::IsotonicEncodingLR;
  throw ConfigError("unknown head kind: " + std::string(name));
}

std::string_view head_kind_name(HeadKind kind) {
  switch (kind) {
    case HeadKind::Linear: return "linear";
    case HeadKind::Logarithmic: return "log";
    case HeadKind::SShaped: return "sshaped";
    case HeadKind::IsotonicEncodingLR: return "isotonic";
  }
  throw ConfigError("invalid head kind");
}

TreatmentGrid TreatmentGrid::uniform(double t_max, double step) {
  if (t_max < 0.0 || step <= 0.0) throw ConfigError("invalid treatment grid bounds");
  TreatmentGrid g;
  const int n = static_cast<int>(std::round(t_max / step));
  g.levels.reserve(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    g.levels.push_back(std::round(static_cast<double>(i) * step * 10.0) / 10.0);
  }
  g.validate();
  return g;
}

void TreatmentGrid::validate() const {
  if (levels.empty()) throw ConfigError("empty treatment grid");
  if (levels.front() != 0.0) throw ConfigError("treatment grid must start at 0");
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) throw ConfigError("treatment grid not strictly ascending");
  }
}

std::size_t head_param_count(HeadKind kind, const HeadHyper& hyper) {
  switch (kind) {
    case HeadKind::Linear:
    case HeadKind::Logarithmic:
    case HeadKind::SShaped:
      return 2;
    case HeadKind::IsotonicEncodingLR:
      if (hyper.max_treatment < 0) throw ConfigError("isotonic N must be >= 0");
      return static_cast<std::size_t>(hyper.max_treatment) + 1;
  }
  throw ConfigError("invalid head kind");
}

HeadParams param_transform(std::span<const double> raw, HeadKind kind,
                           const HeadHyper& hyper, bool constrain_intercept) {
  if (raw.size() != head_param_count(kind, hyper)) {
    throw ConfigError("head parameter arity mismatch");
  }
  HeadParams p;
  p.kind = kind;
  p.hyper = hyper;
  p.values.reserve(raw.size());
  if (kind == HeadKind::IsotonicEncodingLR) {
    for (double v : raw) p.values.push_back(softplus(v));
  } else {
    p.values.push_back(softplus(raw[0]));  // slope / steepness a >= 0
    p.values.push_back(constrain_intercept ? softplus(raw[1]) : raw[1]);
  }
  return p;
}

std::vector<double> isotonic_encode(int t, int n) {
  if (t < 0 || t > n) throw ValidationError("isotonic treatment out of range");
  std::vector<double> enc(static_cast<std::size_t>(n) + 1, 0.0);
  for (int i = 0; i <= t; ++i) enc[static_cast<std::size_t>(i)] = 1.0;
  return enc;
}

double head_eval(const HeadParams& p, double t) {
  if (t < 0.0) throw ValidationError("treatment must be >= 0");
  switch (p.kind) {
    case HeadKind::Linear:
      return p.values[0] * t + p.values[1];
    case HeadKind::Logarithmic:
      return p.values[0] * std::log(t + 1.0) + p.values[1];
    case HeadKind::SShaped:
      // y = D / (1 + e^{-a t + b})
      return p.hyper.ceiling * sigmoid(p.values[0] * t - p.values[1]);
    case HeadKind::IsotonicEncodingLR: {
      const int n = p.hyper.max_treatment;
      const int ti = static_cast<int>(std::llround(t));
      if (ti > n) throw ValidationError("treatment above isotonic range");
      double s = 0.0;
      for (int i = 0; i <= ti; ++i) s += p.values[static_cast<std::size_t>(i)];
      return s;
    }
  }
  throw ConfigError("invalid head kind");
}

double head_delta(const HeadParams& p, double t) {
  if (t == 0.0) return 0.0;
  return head_eval(p, t) - head_eval(p, 0.0);
}

bool check_monotone(const HeadParams& p, const TreatmentGrid& grid) {
  grid.validate();
  double prev = head_eval(p, grid.levels[0]);
  for (std::size_t i = 1; i < grid.levels.size(); ++i) {
    const double cur = head_eval(p, grid.levels[i]);
    if (cur < prev - 1e-12) return false;
    prev = cur;
  }
  return true;
}

}  // namespace mmce
