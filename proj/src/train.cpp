#include "mmce/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

namespace mmce {

void Example::validate() const {
  if (!treated && t != 0.0) throw ValidationError("blank example with nonzero treatment");
  if (t < 0.0) throw ValidationError("negative treatment");
  if (attendance != 0.0 && attendance != 1.0) {
    throw ValidationError("attendance label must be 0 or 1");
  }
  if (orders < 0.0) throw ValidationError("negative orders label");
  if (attendance == 0.0 && orders != 0.0) {
    throw ValidationError("orders label must be 0 when attendance is 0");
  }
  for (double v : x) {
    if (!std::isfinite(v)) throw ValidationError("non-finite feature");
  }
}

void Dataset::validate() const {
  for (const Example& e : examples) {
    if (e.x.size() != feature_width) throw ValidationError("feature width mismatch in dataset");
    e.validate();
  }
}

std::vector<const Example*> Dataset::blank() const {
  std::vector<const Example*> out;
  for (const Example& e : examples) {
    if (!e.treated) out.push_back(&e);
  }
  return out;
}

std::vector<const Example*> Dataset::treated() const {
  std::vector<const Example*> out;
  for (const Example& e : examples) {
    if (e.treated) out.push_back(&e);
  }
  return out;
}

void TrainConfig::validate() const {
  if (weight_p <= 0.0 || weight_o <= 0.0) throw ConfigError("loss weights must be > 0");
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (learning_rate <= 0.0) throw ConfigError("learning rate must be > 0");
}

std::string format_log_line(const TrainLogEntry& e) {
  std::ostringstream os;
  os << "phase=" << e.phase << " epoch=" << e.epoch << " loss=" << e.loss
     << " loss_p=" << e.loss_p << " loss_o=" << e.loss_o;
  return os.str();
}

LossBreakdown composite_loss(const MmceModel& model, std::span<const Example* const> batch,
                             double weight_p, double weight_o, GradientMap* grads) {
  if (batch.empty()) throw UsageError("composite_loss on empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  LossBreakdown out;
  Tape tape(model.store(), grads);
  for (const Example* e : batch) {
    tape.reset();
    const auto nodes =
        model.loss_graph(tape, e->x, e->t, e->attendance, e->orders, weight_p, weight_o);
    out.loss_p += nodes.loss_p * inv_n;
    out.loss_o += nodes.loss_o * inv_n;
    if (grads != nullptr) tape.backward(nodes.total, inv_n);
  }
  out.total = weight_p * out.loss_p + weight_o * out.loss_o;
  if (!std::isfinite(out.total)) throw NumericError("non-finite composite loss");
  return out;
}

namespace {

void run_phase(MmceModel& model, std::span<const Example* const> rows,
               const TrainConfig& cfg, const std::string& phase,
               const std::vector<std::string>& trainable_groups) {
  cfg.validate();
  if (rows.empty()) throw ValidationError("no examples for phase " + phase);
  for (const Example* e : rows) {
    if (e->x.size() != model.config().feature_width) {
      throw ValidationError("feature width mismatch");
    }
  }

  auto& store = model.store();
  for (auto& g : store.groups()) {
    g.trainable = std::find(trainable_groups.begin(), trainable_groups.end(), g.name) !=
                  trainable_groups.end();
  }

  OptimState state = OptimState::init(store, cfg.learning_rate);
  GradientMap grads = GradientMap::zeros_like(store);
  std::vector<const Example*> order(rows.begin(), rows.end());
  std::mt19937_64 rng(cfg.seed ^ std::hash<std::string>{}(phase));

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double sum_total = 0.0, sum_p = 0.0, sum_o = 0.0;
    std::size_t n_batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t len = std::min(cfg.batch_size, order.size() - start);
      grads.zero();
      const auto loss = composite_loss(model, {order.data() + start, len}, cfg.weight_p,
                                       cfg.weight_o, &grads);
      optimizer_step(store, grads, state);
      sum_total += loss.total;
      sum_p += loss.loss_p;
      sum_o += loss.loss_o;
      ++n_batches;
    }
    if (cfg.log) {
      const double inv = 1.0 / static_cast<double>(n_batches);
      cfg.log({phase, epoch, sum_total * inv, sum_p * inv, sum_o * inv});
    }
  }

  for (auto& g : store.groups()) g.trainable = true;
}

}  // namespace

void train_phase_natural(MmceModel& model, std::span<const Example* const> blank_rows,
                         const TrainConfig& cfg) {
  if (!model.two_phase()) {
    throw ConfigError("scheme has no natural/incremental phase split");
  }
  for (const Example* e : blank_rows) {
    if (e->treated) throw ValidationError("treated example in natural phase");
  }
  run_phase(model, blank_rows, cfg, "natural", model.natural_groups());
}

void train_phase_incremental(MmceModel& model, std::span<const Example* const> treated_rows,
                             const TrainConfig& cfg) {
  if (!model.two_phase()) {
    throw ConfigError("scheme has no natural/incremental phase split");
  }
  for (const Example* e : treated_rows) {
    if (!e->treated) throw ValidationError("blank example in incremental phase");
  }
  run_phase(model, treated_rows, cfg, "incremental", model.incremental_groups());
}

MmceModel fit(const Dataset& data, const ModelConfig& model_cfg, const TrainConfig& cfg) {
  cfg.validate();
  data.validate();
  if (data.feature_width != model_cfg.feature_width) {
    throw ConfigError("dataset/model feature width mismatch");
  }
  MmceModel model = MmceModel::init(model_cfg, cfg.seed);
  if (model.two_phase()) {
    const auto blank = data.blank();
    const auto treated = data.treated();
    if (blank.empty()) throw ValidationError("two-phase scheme needs blank-group rows");
    if (treated.empty()) throw ValidationError("two-phase scheme needs treated rows");
    train_phase_natural(model, blank, cfg);
    train_phase_incremental(model, treated, cfg);
  } else {
    std::vector<const Example*> all;
    all.reserve(data.examples.size());
    for (const Example& e : data.examples) all.push_back(&e);
    if (all.empty()) throw ValidationError("empty dataset");
    run_phase(model, all, cfg, "all", model.natural_groups());
  }
  return model;
}

}  // namespace mmce
