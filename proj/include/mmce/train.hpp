#pragma once

// Two-phase training: fit the natural side on blank-group rows, then the
// incremental heads on treated rows with everything natural frozen.
// Single-split schemes (Minimalist, Sequence, Mmce3) train in one phase on
// all rows.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mmce/model.hpp"

namespace mmce {

struct Example {
  std::int64_t id = 0;
  std::vector<double> x;
  double t = 0.0;
  double attendance = 0.0;  // {0,1}
  double orders = 0.0;      // >= 0
  bool treated = false;     // false = blank group

  void validate() const;
};

struct Dataset {
  std::size_t feature_width = 0;
  std::vector<Example> examples;

  void validate() const;
  std::vector<const Example*> blank() const;
  std::vector<const Example*> treated() const;
};

struct TrainLogEntry {
  std::string phase;
  int epoch = 0;
  double loss = 0.0;
  double loss_p = 0.0;
  double loss_o = 0.0;
};

std::string format_log_line(const TrainLogEntry& e);

struct TrainConfig {
  double weight_p = 1.0;  // a
  double weight_o = 1.0;  // b
  int epochs = 10;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  std::function<void(const TrainLogEntry&)> log;  // optional

  void validate() const;
};

struct LossBreakdown {
  double total = 0.0;
  double loss_p = 0.0;
  double loss_o = 0.0;
};

// Mean composite loss a*loss_p + b*loss_o over the batch; when grads is
// non-null, also accumulates d(mean loss)/d(params) for trainable groups.
LossBreakdown composite_loss(const MmceModel& model, std::span<const Example* const> batch,
                             double weight_p, double weight_o,
                             GradientMap* grads = nullptr);

void train_phase_natural(MmceModel& model, std::span<const Example* const> blank_rows,
                         const TrainConfig& cfg);
void train_phase_incremental(MmceModel& model, std::span<const Example* const> treated_rows,
                             const TrainConfig& cfg);

MmceModel fit(const Dataset& data, const ModelConfig& model_cfg, const TrainConfig& cfg);

}  // namespace mmce
