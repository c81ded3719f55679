#pragma once

// Composes the backbone and monotone heads into the scheme catalog:
// Minimalist, DualTask, Sequence, Mmce1, Mmce2, Mmce3. Treatment enters only
// through the heads, so monotonicity in t is architectural.

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mmce/heads.hpp"
#include "mmce/tensor.hpp"

namespace mmce {

enum class SchemeKind { Minimalist, DualTask, Sequence, Mmce1, Mmce2, Mmce3 };

SchemeKind scheme_from_name(std::string_view name);
std::string_view scheme_name(SchemeKind kind);

struct ModelConfig {
  SchemeKind scheme = SchemeKind::Mmce2;
  HeadKind head = HeadKind::SShaped;
  std::size_t feature_width = 0;
  std::vector<std::size_t> hidden = {64, 64};
  HeadHyper hyper;
  TreatmentGrid grid;

  void validate() const;
};

struct ResponseCurve {
  std::int64_t id = 0;
  std::vector<double> grid;
  std::vector<double> attendance;
  std::vector<double> orders_pa;
  std::vector<double> orders;
  std::vector<double> incremental;  // orders - natural, 0 at t=0
  double natural = 0.0;             // orders at t=0
};

class MmceModel {
 public:
  static MmceModel init(ModelConfig cfg, std::uint64_t seed);
  static MmceModel from_parts(ModelConfig cfg, ParameterStore store);

  const ModelConfig& config() const { return cfg_; }
  ParameterStore& store() { return store_; }
  const ParameterStore& store() const { return store_; }

  // Attendance factor exists only for the sequence-style schemes.
  bool has_attendance() const;
  // Natural/incremental split (two training phases) exists for DualTask/Mmce1/Mmce2.
  bool two_phase() const;

  double predict_attendance(std::span<const double> x, double t) const;
  double predict_orders_pa(std::span<const double> x, double t) const;
  double predict_orders(std::span<const double> x, double t) const;
  std::pair<double, double> decompose(std::span<const double> x, double t) const;
  ResponseCurve predict_curve(std::int64_t id, std::span<const double> x) const;

  // Groups updated in the natural / incremental training phase. For
  // single-phase schemes natural_groups() is every group.
  std::vector<std::string> natural_groups() const;
  std::vector<std::string> incremental_groups() const;

  struct ForwardNodes {
    Tape::Id attendance = -1;        // probability (sequence schemes only)
    Tape::Id attendance_logit = -1;  // pre-sigmoid, for the BCE loss
    Tape::Id orders_pa = -1;
    Tape::Id orders = -1;
    bool has_attendance = false;
  };
  ForwardNodes forward_graph(Tape& tape, std::span<const double> x, double t) const;

  struct LossNodes {
    Tape::Id total = -1;
    double loss_p = 0.0;  // forward values, for logging
    double loss_o = 0.0;
  };
  LossNodes loss_graph(Tape& tape, std::span<const double> x, double t,
                       double attendance_label, double orders_label,
                       double weight_p, double weight_o) const;

 private:
  MmceModel(ModelConfig cfg, ParameterStore store)
      : cfg_(std::move(cfg)), store_(std::move(store)) {}

  void check_width(std::span<const double> x) const;

  ModelConfig cfg_;
  ParameterStore store_;
};

}  // namespace mmce
