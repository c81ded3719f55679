#include "mmce/model.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace mmce {

namespace {

constexpr const char* kTrunk = "trunk.";
constexpr const char* kTrunkAtt = "trunk_att.";
constexpr const char* kTrunkOrd = "trunk_ord.";
constexpr const char* kNatAtt = "natural_attendance.";
constexpr const char* kNatOrd = "natural_orders.";
constexpr const char* kIncAtt = "incremental_attendance_head.";
constexpr const char* kIncOrd = "incremental_orders_head.";
constexpr const char* kAttHead = "attendance_head.";
constexpr const char* kOrdHead = "orders_head.";

std::uint64_t mix_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 1469598103934665603ull ^ seed;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  }
  return h;
}

// Trunks using the respective scheme wiring. Separate-trunk schemes pair each
// task with its own backbone; shared-trunk schemes reuse one.
bool separate_trunks(SchemeKind s) {
  return s == SchemeKind::Mmce1 || s == SchemeKind::Sequence;
}

}  // namespace

SchemeKind scheme_from_name(std::string_view name) {
  if (name == "minimalist") return SchemeKind::Minimalist;
  if (name == "dualtask") return SchemeKind::DualTask;
  if (name == "sequence") return SchemeKind::Sequence;
  if (name == "mmce1") return SchemeKind::Mmce1;
  if (name == "mmce2") return SchemeKind::Mmce2;
  if (name == "mmce3") return SchemeKind::Mmce3;
  throw ConfigError("unknown scheme: " + std::string(name));
}

std::string_view scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Minimalist: return "minimalist";
    case SchemeKind::DualTask: return "dualtask";
    case SchemeKind::Sequence: return "sequence";
    case SchemeKind::Mmce1: return "mmce1";
    case SchemeKind::Mmce2: return "mmce2";
    case SchemeKind::Mmce3: return "mmce3";
  }
  throw ConfigError("invalid scheme kind");
}

void ModelConfig::validate() const {
  if (feature_width == 0) throw ConfigError("feature width must be positive");
  if (hidden.empty()) throw ConfigError("backbone needs at least one hidden layer");
  grid.validate();
  if (head == HeadKind::IsotonicEncodingLR &&
      grid.levels.back() > static_cast<double>(hyper.max_treatment)) {
    throw ConfigError("treatment grid exceeds isotonic head range N");
  }
  if (head == HeadKind::SShaped && hyper.ceiling <= 0.0) {
    throw ConfigError("sshaped ceiling D must be positive");
  }
}

bool MmceModel::has_attendance() const {
  const SchemeKind s = cfg_.scheme;
  return s == SchemeKind::Sequence || s == SchemeKind::Mmce1 ||
         s == SchemeKind::Mmce2 || s == SchemeKind::Mmce3;
}

bool MmceModel::two_phase() const {
  const SchemeKind s = cfg_.scheme;
  return s == SchemeKind::DualTask || s == SchemeKind::Mmce1 || s == SchemeKind::Mmce2;
}

MmceModel MmceModel::init(ModelConfig cfg, std::uint64_t seed) {
  cfg.validate();
  ParameterStore store;
  const std::size_t hwidth = cfg.hidden.back();
  const std::size_t nparams = head_param_count(cfg.head, cfg.hyper);

  std::vector<std::size_t> trunk_spec;
  trunk_spec.push_back(cfg.feature_width);
  for (std::size_t h : cfg.hidden) trunk_spec.push_back(h);

  auto add_trunk = [&](const char* prefix) {
    mlp_init(store, prefix, trunk_spec, mix_seed(seed, prefix));
  };
  auto add_proj = [&](const char* prefix, std::size_t out) {
    const std::size_t spec[2] = {hwidth, out};
    mlp_init(store, prefix, spec, mix_seed(seed, prefix));
  };

  switch (cfg.scheme) {
    case SchemeKind::Minimalist:
      add_trunk(kTrunk);
      add_proj(kOrdHead, nparams);
      break;
    case SchemeKind::DualTask:
      add_trunk(kTrunk);
      add_proj(kNatOrd, 1);
      add_proj(kIncOrd, nparams);
      break;
    case SchemeKind::Sequence:
      add_trunk(kTrunkAtt);
      add_trunk(kTrunkOrd);
      add_proj(kAttHead, nparams);
      add_proj(kOrdHead, nparams);
      break;
    case SchemeKind::Mmce1:
      add_trunk(kTrunkAtt);
      add_trunk(kTrunkOrd);
      add_proj(kNatAtt, 1);
      add_proj(kNatOrd, 1);
      add_proj(kIncAtt, nparams);
      add_proj(kIncOrd, nparams);
      break;
    case SchemeKind::Mmce2:
      add_trunk(kTrunk);
      add_proj(kNatAtt, 1);
      add_proj(kNatOrd, 1);
      add_proj(kIncAtt, nparams);
      add_proj(kIncOrd, nparams);
      break;
    case SchemeKind::Mmce3:
      add_trunk(kTrunk);
      add_proj(kAttHead, nparams);
      add_proj(kOrdHead, nparams);
      break;
  }
  return MmceModel(std::move(cfg), std::move(store));
}

MmceModel MmceModel::from_parts(ModelConfig cfg, ParameterStore store) {
  cfg.validate();
  return MmceModel(std::move(cfg), std::move(store));
}

void MmceModel::check_width(std::span<const double> x) const {
  if (x.size() != cfg_.feature_width) throw ConfigError("feature width mismatch");
}

std::vector<std::string> MmceModel::natural_groups() const {
  std::vector<std::string> out;
  const auto inc = incremental_groups();
  for (const auto& g : store_.groups()) {
    if (std::find(inc.begin(), inc.end(), g.name) == inc.end()) out.push_back(g.name);
  }
  return out;
}

std::vector<std::string> MmceModel::incremental_groups() const {
  std::vector<std::string> out;
  if (!two_phase()) return out;
  for (const auto& g : store_.groups()) {
    if (g.name.starts_with(kIncAtt) || g.name.starts_with(kIncOrd)) out.push_back(g.name);
  }
  return out;
}

namespace {

struct HeadGraph {
  // Builds head_eval / head_delta tape nodes from a raw parameter-node vector.
  Tape& tape;
  HeadKind kind;
  HeadHyper hyper;
  Tape::Id raw;

  Tape::Id transformed_slope() const {
    return tape.softplus(tape.slice(raw, 0, 1));
  }
  Tape::Id intercept(bool constrain) const {
    const Tape::Id b = tape.slice(raw, 1, 1);
    return constrain ? tape.softplus(b) : b;
  }

  Tape::Id eval(double t, bool constrain_intercept) const {
    switch (kind) {
      case HeadKind::Linear:
        return tape.add(tape.scale(transformed_slope(), t),
                        intercept(constrain_intercept));
      case HeadKind::Logarithmic:
        return tape.add(tape.scale(transformed_slope(), std::log(t + 1.0)),
                        intercept(constrain_intercept));
      case HeadKind::SShaped: {
        const Tape::Id a = transformed_slope();
        const Tape::Id b = intercept(false);
        return tape.scale(tape.sigmoid(tape.sub(tape.scale(a, t), b)), hyper.ceiling);
      }
      case HeadKind::IsotonicEncodingLR: {
        const int ti = static_cast<int>(std::llround(t));
        const auto enc = isotonic_encode(ti, hyper.max_treatment);
        return tape.dot_const(tape.softplus(raw), enc);
      }
    }
    throw ConfigError("invalid head kind");
  }

  Tape::Id delta(double t) const {
    switch (kind) {
      case HeadKind::Linear:
        return tape.scale(transformed_slope(), t);
      case HeadKind::Logarithmic:
        return tape.scale(transformed_slope(), std::log(t + 1.0));
      case HeadKind::SShaped:
        return tape.sub(eval(t, false), eval(0.0, false));
      case HeadKind::IsotonicEncodingLR: {
        const int ti = static_cast<int>(std::llround(t));
        auto enc = isotonic_encode(ti, hyper.max_treatment);
        enc[0] = 0.0;  // encoding(t) - encoding(0)
        return tape.dot_const(tape.softplus(raw), enc);
      }
    }
    throw ConfigError("invalid head kind");
  }
};

}  // namespace

MmceModel::ForwardNodes MmceModel::forward_graph(Tape& tape, std::span<const double> x,
                                                 double t) const {
  check_width(x);
  if (t < 0.0) throw ValidationError("treatment must be >= 0");

  std::vector<std::size_t> trunk_spec;
  trunk_spec.push_back(cfg_.feature_width);
  for (std::size_t h : cfg_.hidden) trunk_spec.push_back(h);
  const std::size_t hwidth = cfg_.hidden.back();
  const std::size_t nparams = head_param_count(cfg_.head, cfg_.hyper);

  const Tape::Id input = tape.constant(x);
  auto trunk_feat = [&](const char* prefix) {
    return tape.sigmoid(mlp_graph(tape, prefix, trunk_spec, input));
  };
  auto proj = [&](const char* prefix, Tape::Id feat, std::size_t out) {
    const Tape::Id w = tape.param(std::string(prefix) + "W0");
    const Tape::Id b = tape.param(std::string(prefix) + "b0");
    return tape.affine(w, b, feat, out, hwidth);
  };
  auto head = [&](Tape::Id raw) { return HeadGraph{tape, cfg_.head, cfg_.hyper, raw}; };

  ForwardNodes out;
  switch (cfg_.scheme) {
    case SchemeKind::Minimalist: {
      const Tape::Id feat = trunk_feat(kTrunk);
      out.orders = head(proj(kOrdHead, feat, nparams)).eval(t, /*constrain=*/true);
      out.orders_pa = out.orders;
      break;
    }
    case SchemeKind::DualTask: {
      const Tape::Id feat = trunk_feat(kTrunk);
      const Tape::Id nat = tape.softplus(proj(kNatOrd, feat, 1));
      out.orders = tape.add(nat, head(proj(kIncOrd, feat, nparams)).delta(t));
      out.orders_pa = out.orders;
      break;
    }
    case SchemeKind::Sequence:
    case SchemeKind::Mmce3: {
      const Tape::Id att_feat =
          trunk_feat(cfg_.scheme == SchemeKind::Sequence ? kTrunkAtt : kTrunk);
      const Tape::Id ord_feat =
          cfg_.scheme == SchemeKind::Sequence ? trunk_feat(kTrunkOrd) : att_feat;
      out.attendance_logit = head(proj(kAttHead, att_feat, nparams)).eval(t, false);
      out.attendance = tape.sigmoid(out.attendance_logit);
      out.orders_pa = head(proj(kOrdHead, ord_feat, nparams)).eval(t, /*constrain=*/true);
      out.orders = tape.mul(out.attendance, out.orders_pa);
      out.has_attendance = true;
      break;
    }
    case SchemeKind::Mmce1:
    case SchemeKind::Mmce2: {
      const Tape::Id att_feat =
          trunk_feat(cfg_.scheme == SchemeKind::Mmce1 ? kTrunkAtt : kTrunk);
      const Tape::Id ord_feat =
          cfg_.scheme == SchemeKind::Mmce1 ? trunk_feat(kTrunkOrd) : att_feat;
      const Tape::Id nat_logit = proj(kNatAtt, att_feat, 1);
      out.attendance_logit =
          tape.add(nat_logit, head(proj(kIncAtt, att_feat, nparams)).delta(t));
      out.attendance = tape.sigmoid(out.attendance_logit);
      const Tape::Id nat_ord = tape.softplus(proj(kNatOrd, ord_feat, 1));
      out.orders_pa = tape.add(nat_ord, head(proj(kIncOrd, ord_feat, nparams)).delta(t));
      out.orders = tape.mul(out.attendance, out.orders_pa);
      out.has_attendance = true;
      break;
    }
  }
  return out;
}

double MmceModel::predict_attendance(std::span<const double> x, double t) const {
  if (!has_attendance()) {
    throw ConfigError("scheme has no attendance factor: " +
                      std::string(scheme_name(cfg_.scheme)));
  }
  Tape tape(store_);
  return tape.scalar(forward_graph(tape, x, t).attendance);
}

double MmceModel::predict_orders_pa(std::span<const double> x, double t) const {
  Tape tape(store_);
  return tape.scalar(forward_graph(tape, x, t).orders_pa);
}

double MmceModel::predict_orders(std::span<const double> x, double t) const {
  Tape tape(store_);
  return tape.scalar(forward_graph(tape, x, t).orders);
}

std::pair<double, double> MmceModel::decompose(std::span<const double> x, double t) const {
  const double natural = predict_orders(x, 0.0);
  const double incremental = (t == 0.0) ? 0.0 : predict_orders(x, t) - natural;
  return {natural, incremental};
}

ResponseCurve MmceModel::predict_curve(std::int64_t id, std::span<const double> x) const {
  ResponseCurve curve;
  curve.id = id;
  curve.grid = cfg_.grid.levels;
  curve.attendance.reserve(curve.grid.size());
  curve.orders_pa.reserve(curve.grid.size());
  curve.orders.reserve(curve.grid.size());
  curve.incremental.reserve(curve.grid.size());
  for (std::size_t i = 0; i < curve.grid.size(); ++i) {
    const double t = curve.grid[i];
    Tape tape(store_);
    const ForwardNodes f = forward_graph(tape, x, t);
    const double orders = tape.scalar(f.orders);
    curve.orders.push_back(orders);
    curve.attendance.push_back(f.has_attendance ? tape.scalar(f.attendance) : 1.0);
    curve.orders_pa.push_back(f.has_attendance ? tape.scalar(f.orders_pa) : orders);
    if (i == 0) curve.natural = orders;
    curve.incremental.push_back(i == 0 ? 0.0 : orders - curve.natural);
  }
  return curve;
}

MmceModel::LossNodes MmceModel::loss_graph(Tape& tape, std::span<const double> x, double t,
                                           double attendance_label, double orders_label,
                                           double weight_p, double weight_o) const {
  const ForwardNodes f = forward_graph(tape, x, t);
  LossNodes out;

  // Squared error on orders over the whole batch (ESMM-style whole-space loss).
  const Tape::Id diff = tape.shift(f.orders, -orders_label);
  const Tape::Id se = tape.mul(diff, diff);
  out.loss_o = tape.scalar(se);

  if (f.has_attendance) {
    // BCE with logits: softplus(z) - y*z
    const Tape::Id z = f.attendance_logit;
    const Tape::Id bce = tape.add(tape.softplus(z), tape.scale(z, -attendance_label));
    out.loss_p = tape.scalar(bce);
    out.total = tape.add(tape.scale(bce, weight_p), tape.scale(se, weight_o));
  } else {
    out.total = tape.scale(se, weight_o);
  }
  return out;
}

}  // namespace mmce
