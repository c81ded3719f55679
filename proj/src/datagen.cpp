#include "mmce/datagen.hpp"

#include <algorithm>
#include <cmath>

#include "mmce/io.hpp"

namespace mmce {

void GenConfig::validate() const {
  if (feature_width < 1) throw ConfigError("feature width must be >= 1");
  if (bias_strength < 0.0 || bias_strength > 1.0) {
    throw ConfigError("bias_strength must be in [0,1]");
  }
  if (blank_fraction <= 0.0 || blank_fraction >= 1.0) {
    throw ConfigError("blank_fraction must be in (0,1)");
  }
  if (t_max <= 0.0) throw ConfigError("t_max must be positive");
  if (noise_scale < 0.0) throw ConfigError("noise_scale must be >= 0");
}

namespace {

double snap_to_grid(double t, double t_max) {
  t = std::clamp(t, 0.0, t_max);
  return std::round(t * 10.0) / 10.0;
}

double saturation(double rate, double t) { return 1.0 - std::exp(-rate * t); }

void check_range(double t, const GenConfig& cfg) {
  if (t < 0.0 || t > cfg.t_max + 1e-9) throw ValidationError("treatment out of range");
}

}  // namespace

std::vector<Rider> gen_population(const GenConfig& cfg) {
  cfg.validate();
  std::vector<Rider> riders;
  riders.reserve(cfg.n_riders);
  for (std::size_t i = 0; i < cfg.n_riders; ++i) {
    // Per-rider derived stream keeps generation order-independent.
    std::mt19937_64 rng(cfg.seed * 0x9e3779b97f4a7c15ull + i);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Rider r;
    r.id = static_cast<std::int64_t>(i);
    r.ability = unif(rng);
    const double u = r.ability;
    r.att_base = 0.5 + 0.2 * u;
    r.att_inc = 0.08 * (1.0 - u);
    r.ord_base = 1.5 + 3.0 * u;
    r.ord_inc = 3.0 * (1.0 - u) + 0.3;
    r.rate = 0.8;
    r.x.resize(cfg.feature_width);
    r.x[0] = u + cfg.noise_scale * gauss(rng);
    if (cfg.feature_width > 1) r.x[1] = u * u + cfg.noise_scale * gauss(rng);
    for (std::size_t d = 2; d < cfg.feature_width; ++d) r.x[d] = gauss(rng);
    riders.push_back(std::move(r));
  }
  return riders;
}

double true_attendance(const Rider& r, double t, const GenConfig& cfg) {
  check_range(t, cfg);
  return r.att_base + r.att_inc * saturation(r.rate, t);
}

double true_orders_pa(const Rider& r, double t, const GenConfig& cfg) {
  check_range(t, cfg);
  return r.ord_base + r.ord_inc * saturation(r.rate, t);
}

double true_orders(const Rider& r, double t, const GenConfig& cfg) {
  return true_attendance(r, t, cfg) * true_orders_pa(r, t, cfg);
}

double assign_treatment(const Rider& r, const GenConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, cfg.t_max);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double inverse_policy = (1.0 - r.ability) * cfg.t_max;
  const double uniform_policy = unif(rng);
  double t = cfg.bias_strength * inverse_policy +
             (1.0 - cfg.bias_strength) * uniform_policy;
  if (cfg.noise_scale > 0.0) t += cfg.noise_scale * gauss(rng);
  return snap_to_grid(t, cfg.t_max);
}

Outcome sample_outcome(const Rider& r, double t, const GenConfig& cfg, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Outcome out;
  const double p = true_attendance(r, t, cfg);
  out.attendance = unif(rng) < p ? 1.0 : 0.0;
  if (out.attendance == 1.0) {
    // Mean-one lognormal factor gives the long-tailed orders distribution.
    const double sigma = cfg.noise_scale;
    const double factor = std::exp(sigma * gauss(rng) - 0.5 * sigma * sigma);
    out.orders = std::max(0.0, true_orders_pa(r, t, cfg) * factor);
  }
  return out;
}

Generated build_dataset(const GenConfig& cfg) {
  Generated gen;
  gen.riders = gen_population(cfg);
  gen.dataset.feature_width = cfg.feature_width;

  const std::size_t n_blank =
      static_cast<std::size_t>(std::llround(cfg.blank_fraction * static_cast<double>(cfg.n_riders)));
  std::vector<std::size_t> order(cfg.n_riders);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 split_rng(cfg.seed ^ 0xb1a2d3c4e5f60718ull);
  std::shuffle(order.begin(), order.end(), split_rng);
  std::vector<bool> blank(cfg.n_riders, false);
  for (std::size_t i = 0; i < n_blank && i < order.size(); ++i) blank[order[i]] = true;

  const TreatmentGrid grid = cfg.grid();
  for (std::size_t i = 0; i < gen.riders.size(); ++i) {
    const Rider& r = gen.riders[i];
    std::mt19937_64 rng(cfg.seed * 0xd1342543de82ef95ull + i + 1);
    Example e;
    e.id = r.id;
    e.x = r.x;
    e.treated = !blank[i];
    e.t = e.treated ? assign_treatment(r, cfg, rng) : 0.0;
    if (e.treated && e.t == 0.0) e.t = 0.1;  // treated rows carry a positive incentive
    const Outcome oc = sample_outcome(r, e.t, cfg, rng);
    e.attendance = oc.attendance;
    e.orders = oc.orders;
    gen.dataset.examples.push_back(std::move(e));

    for (double t : grid.levels) {
      gen.truth.push_back({r.id, r.ability, t, true_attendance(r, t, cfg),
                           true_orders_pa(r, t, cfg), true_orders(r, t, cfg)});
    }
  }
  return gen;
}

void emit_dataset(const GenConfig& cfg, const std::string& data_path,
                  const std::string& truth_path) {
  const Generated gen = build_dataset(cfg);
  io::write_dataset_csv(gen.dataset, data_path);
  io::write_truth_csv(gen.truth, truth_path);
}

}  // namespace mmce
