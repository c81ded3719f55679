#include "mmce/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mmce/kernels.hpp"

namespace mmce {

namespace {

double stable_sigmoid(double x) {
  if (x >= 0.0) {
    const double e = std::exp(-x);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double stable_softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

}  // namespace

// ---------------------------------------------------------------------------
// ParameterStore

void ParameterStore::add_group(std::string name, std::vector<double> values, bool trainable) {
  if (has_group(name)) throw ConfigError("duplicate parameter group: " + name);
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericError("non-finite value in group: " + name);
  }
  groups_.push_back({std::move(name), std::move(values), trainable});
}

bool ParameterStore::has_group(std::string_view name) const {
  return std::any_of(groups_.begin(), groups_.end(),
                     [&](const Group& g) { return g.name == name; });
}

ParameterStore::Group& ParameterStore::group(std::string_view name) {
  for (Group& g : groups_) {
    if (g.name == name) return g;
  }
  throw ConfigError("unknown parameter group: " + std::string(name));
}

const ParameterStore::Group& ParameterStore::group(std::string_view name) const {
  for (const Group& g : groups_) {
    if (g.name == name) return g;
  }
  throw ConfigError("unknown parameter group: " + std::string(name));
}

void ParameterStore::set_trainable(std::string_view name, bool trainable) {
  group(name).trainable = trainable;
}

std::size_t ParameterStore::total_size() const {
  std::size_t n = 0;
  for (const Group& g : groups_) n += g.values.size();
  return n;
}

// ---------------------------------------------------------------------------
// GradientMap

GradientMap GradientMap::zeros_like(const ParameterStore& store) {
  GradientMap gm;
  for (const auto& g : store.groups()) {
    gm.groups.push_back({g.name, std::vector<double>(g.values.size(), 0.0)});
  }
  return gm;
}

void GradientMap::zero() {
  for (auto& g : groups) std::fill(g.values.begin(), g.values.end(), 0.0);
}

GradientMap::Group& GradientMap::group(std::string_view name) {
  for (Group& g : groups) {
    if (g.name == name) return g;
  }
  throw ConfigError("unknown gradient group: " + std::string(name));
}

const GradientMap::Group& GradientMap::group(std::string_view name) const {
  for (const Group& g : groups) {
    if (g.name == name) return g;
  }
  throw ConfigError("unknown gradient group: " + std::string(name));
}

void GradientMap::scale(double s) {
  for (auto& g : groups) {
    for (double& v : g.values) v *= s;
  }
}

// ---------------------------------------------------------------------------
// Optimizer

OptimState OptimState::init(const ParameterStore& store, double lr) {
  OptimState st;
  st.learning_rate = lr;
  st.m = GradientMap::zeros_like(store);
  st.v = GradientMap::zeros_like(store);
  return st;
}

void optimizer_step(ParameterStore& store, const GradientMap& grads, OptimState& state) {
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (auto& g : store.groups()) {
    if (!g.trainable) continue;
    const auto& gg = grads.group(g.name).values;
    if (gg.size() != g.values.size()) {
      throw ConfigError("gradient shape mismatch for group: " + g.name);
    }
    auto& m = state.m.group(g.name).values;
    auto& v = state.v.group(g.name).values;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      const double grad = gg[i];
      if (!std::isfinite(grad)) {
        throw NumericError("non-finite gradient in group: " + g.name);
      }
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * grad;
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * grad * grad;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      g.values[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Tape

Tape::Tape(const ParameterStore& store, GradientMap* grads)
    : store_(store), grads_(grads) {}

const double* Tape::arena_alloc(std::span<const double> values) {
  val_chunks_.emplace_back(values.begin(), values.end());
  return val_chunks_.back().data();
}

double* Tape::grad_alloc(std::size_t len) {
  grad_chunks_.emplace_back(len, 0.0);
  return grad_chunks_.back().data();
}

Tape::Id Tape::push(Node n) {
  if (grads_ != nullptr && n.op != Op::Param) n.grad = grad_alloc(n.len);
  nodes_.push_back(n);
  forward_done_ = true;
  return static_cast<Id>(nodes_.size() - 1);
}

void Tape::check_id(Id id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size()) {
    throw UsageError("invalid tape node id");
  }
}

Tape::Id Tape::param(std::string_view group_name) {
  const auto& g = store_.group(group_name);
  Node n;
  n.op = Op::Param;
  n.val = g.values.data();
  n.len = g.values.size();
  if (grads_ != nullptr) {
    // Frozen groups get a discarded scratch buffer so the map stays exact zero.
    n.grad = g.trainable ? grads_->group(group_name).values.data() : grad_alloc(n.len);
  }
  return push(n);
}

Tape::Id Tape::constant(std::span<const double> values) {
  Node n;
  n.op = Op::Const;
  n.len = values.size();
  n.val = arena_alloc(values);
  return push(n);
}

Tape::Id Tape::constant(double value) { return constant(std::span<const double>(&value, 1)); }

Tape::Id Tape::affine(Id w, Id b, Id x, std::size_t rows, std::size_t cols) {
  check_id(w);
  check_id(b);
  check_id(x);
  if (nodes_[w].len != rows * cols || nodes_[b].len != rows || nodes_[x].len != cols) {
    throw ConfigError("affine shape mismatch");
  }
  Node n;
  n.op = Op::Affine;
  n.a = w;
  n.b = b;
  n.c = x;
  n.rows = rows;
  n.cols = cols;
  n.len = rows;
  std::vector<double> out(rows);
  kernels::matvec_affine({nodes_[w].val, rows * cols}, {nodes_[b].val, rows},
                         {nodes_[x].val, cols}, out, rows, cols);
  n.val = arena_alloc(out);
  return push(n);
}

Tape::Id Tape::slice(Id x, std::size_t offset, std::size_t len) {
  check_id(x);
  if (offset + len > nodes_[x].len) throw ConfigError("slice out of range");
  Node n;
  n.op = Op::Slice;
  n.a = x;
  n.rows = offset;
  n.len = len;
  n.val = nodes_[x].val + offset;  // view, no copy
  return push(n);
}

Tape::Id Tape::sigmoid(Id x) {
  check_id(x);
  Node n;
  n.op = Op::Sigmoid;
  n.a = x;
  n.len = nodes_[x].len;
  std::vector<double> out(n.len);
  for (std::size_t i = 0; i < n.len; ++i) out[i] = stable_sigmoid(nodes_[x].val[i]);
  n.val = arena_alloc(out);
  return push(n);
}

Tape::Id Tape::softplus(Id x) {
  check_id(x);
  Node n;
  n.op = Op::Softplus;
  n.a = x;
  n.len = nodes_[x].len;
  std::vector<double> out(n.len);
  for (std::size_t i = 0; i < n.len; ++i) out[i] = stable_softplus(nodes_[x].val[i]);
  n.val = arena_alloc(out);
  return push(n);
}

Tape::Id Tape::add(Id a, Id b) {
  check_id(a);
  check_id(b);
  if (nodes_[a].len != nodes_[b].len) throw ConfigError("add shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  n.len = nodes_[a].len;
  std::vector<double> out(n.len);
  for (std::size_t i = 0; i < n.len; ++i) out[i] = nodes_[a].val[i] + nodes_[b].val[i];
  n.val = arena_alloc(out);
  return push(n);
}

Tape::Id Tape::sub(Id a, Id b) {
  check_id(a);
  check_id(b);
  if (nodes_[a].len != nodes_[b].len) throw ConfigError("sub shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  n.len = nodes_[a].len;
  std::vector<double> out(n.len);
  for (std::size_t i = 0; i < n.len; ++i) out[i] = nodes_[a].val[i] - nodes_[b].val[i];
  n.val = arena_alloc(out);
  return push(n);
}

Tape::Id Tape::mul(Id a, Id b) {
  check_id(a);
  check_id(b);
  if (nodes_[a].len != nodes_[b].len) throw ConfigError("mul shape mismatch");
  Node n;
  n.op = Op::Mul;
  n.a = a;
  n.b = b;
  n.len = nodes_[a].len;
  std::vector<double> out(n.len);
  for (std::size_t i = 0; i < n.len; ++i) out[i] = nodes_[a].val[i] * nodes_[b].val[i];
  n.val = arena_alloc(out);
  return push(n);
}

Tape::Id Tape::scale(Id x, double c) {
  check_id(x);
  Node n;
  n.op = Op::Scale;
  n.a = x;
  n.k = c;
  n.len = nodes_[x].len;
  std::vector<double> out(n.len);
  for (std::size_t i = 0; i < n.len; ++i) out[i] = c * nodes_[x].val[i];
  n.val = arena_alloc(out);
  return push(n);
}

Tape::Id Tape::shift(Id x, double c) {
  check_id(x);
  Node n;
  n.op = Op::Shift;
  n.a = x;
  n.k = c;
  n.len = nodes_[x].len;
  std::vector<double> out(n.len);
  for (std::size_t i = 0; i < n.len; ++i) out[i] = nodes_[x].val[i] + c;
  n.val = arena_alloc(out);
  return push(n);
}

Tape::Id Tape::sum(Id x) {
  check_id(x);
  Node n;
  n.op = Op::Sum;
  n.a = x;
  n.len = 1;
  double s = 0.0;
  for (std::size_t i = 0; i < nodes_[x].len; ++i) s += nodes_[x].val[i];
  n.val = arena_alloc(std::span<const double>(&s, 1));
  return push(n);
}

Tape::Id Tape::dot_const(Id x, std::span<const double> weights) {
  check_id(x);
  if (nodes_[x].len != weights.size()) throw ConfigError("dot shape mismatch");
  const Id wc = constant(weights);  // keeps the weights alive for backward
  Node n;
  n.op = Op::DotConst;
  n.a = x;
  n.c = wc;
  n.len = 1;
  const double s = kernels::dot({nodes_[x].val, weights.size()}, weights);
  n.val = arena_alloc(std::span<const double>(&s, 1));
  return push(n);
}

std::span<const double> Tape::value(Id id) const {
  check_id(id);
  return {nodes_[id].val, nodes_[id].len};
}

double Tape::scalar(Id id) const {
  check_id(id);
  if (nodes_[id].len != 1) throw UsageError("scalar() on non-scalar node");
  return nodes_[id].val[0];
}

void Tape::backward(Id loss, double seed) {
  if (grads_ == nullptr) throw UsageError("backward on an evaluation-only tape");
  if (!forward_done_ || nodes_.empty()) throw UsageError("backward without forward");
  check_id(loss);
  if (nodes_[loss].len != 1) throw UsageError("loss must be scalar");
  if (!std::isfinite(nodes_[loss].val[0])) throw NumericError("non-finite loss");

  nodes_[loss].grad[0] += seed;
  for (Id i = static_cast<Id>(nodes_.size()) - 1; i >= 0; --i) {
    const Node& n = nodes_[i];
    const double* g = n.grad;
    switch (n.op) {
      case Op::Param:
      case Op::Const:
        break;
      case Op::Affine: {
        const Node& w = nodes_[n.a];
        const Node& b = nodes_[n.b];
        const Node& x = nodes_[n.c];
        kernels::outer_acc({g, n.rows}, {x.val, n.cols}, {w.grad, n.rows * n.cols},
                           n.rows, n.cols);
        kernels::axpy(1.0, {g, n.rows}, {b.grad, n.rows});
        kernels::matvec_t_acc({w.val, n.rows * n.cols}, {g, n.rows},
                              {x.grad, n.cols}, n.rows, n.cols);
        break;
      }
      case Op::Slice: {
        double* ga = nodes_[n.a].grad + n.rows;
        for (std::size_t k = 0; k < n.len; ++k) ga[k] += g[k];
        break;
      }
      case Op::Sigmoid: {
        double* ga = nodes_[n.a].grad;
        for (std::size_t k = 0; k < n.len; ++k) {
          const double s = n.val[k];
          ga[k] += g[k] * s * (1.0 - s);
        }
        break;
      }
      case Op::Softplus: {
        double* ga = nodes_[n.a].grad;
        const double* xv = nodes_[n.a].val;
        for (std::size_t k = 0; k < n.len; ++k) ga[k] += g[k] * stable_sigmoid(xv[k]);
        break;
      }
      case Op::Add: {
        kernels::axpy(1.0, {g, n.len}, {nodes_[n.a].grad, n.len});
        kernels::axpy(1.0, {g, n.len}, {nodes_[n.b].grad, n.len});
        break;
      }
      case Op::Sub: {
        kernels::axpy(1.0, {g, n.len}, {nodes_[n.a].grad, n.len});
        kernels::axpy(-1.0, {g, n.len}, {nodes_[n.b].grad, n.len});
        break;
      }
      case Op::Mul: {
        double* ga = nodes_[n.a].grad;
        double* gb = nodes_[n.b].grad;
        const double* av = nodes_[n.a].val;
        const double* bv = nodes_[n.b].val;
        for (std::size_t k = 0; k < n.len; ++k) {
          ga[k] += g[k] * bv[k];
          gb[k] += g[k] * av[k];
        }
        break;
      }
      case Op::Scale: {
        kernels::axpy(n.k, {g, n.len}, {nodes_[n.a].grad, n.len});
        break;
      }
      case Op::Shift: {
        kernels::axpy(1.0, {g, n.len}, {nodes_[n.a].grad, n.len});
        break;
      }
      case Op::Sum: {
        double* ga = nodes_[n.a].grad;
        for (std::size_t k = 0; k < nodes_[n.a].len; ++k) ga[k] += g[0];
        break;
      }
      case Op::DotConst: {
        kernels::axpy(g[0], {nodes_[n.c].val, nodes_[n.a].len},
                      {nodes_[n.a].grad, nodes_[n.a].len});
        break;
      }
    }
  }
}

void Tape::reset() {
  nodes_.clear();
  val_chunks_.clear();
  grad_chunks_.clear();
  forward_done_ = false;
}

// ---------------------------------------------------------------------------
// MLP helpers

static std::string layer_name(std::string_view prefix, char kind, std::size_t layer) {
  return std::string(prefix) + kind + std::to_string(layer);
}

void mlp_init(ParameterStore& store, std::string_view prefix,
              std::span<const std::size_t> layer_spec, std::uint64_t seed) {
  if (layer_spec.size() < 2) throw ConfigError("layer spec needs at least two widths");
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_spec.size(); ++l) {
    const std::size_t fan_in = layer_spec[l];
    const std::size_t fan_out = layer_spec[l + 1];
    const double limit = std::sqrt(1.0 / static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-limit, limit);
    std::vector<double> w(fan_in * fan_out);
    for (double& v : w) v = dist(rng);
    store.add_group(layer_name(prefix, 'W', l), std::move(w));
    store.add_group(layer_name(prefix, 'b', l), std::vector<double>(fan_out, 0.0));
  }
}

Tape::Id mlp_graph(Tape& tape, std::string_view prefix,
                   std::span<const std::size_t> layer_spec, Tape::Id input) {
  if (layer_spec.size() < 2) throw ConfigError("layer spec needs at least two widths");
  Tape::Id h = input;
  for (std::size_t l = 0; l + 1 < layer_spec.size(); ++l) {
    const Tape::Id w = tape.param(layer_name(prefix, 'W', l));
    const Tape::Id b = tape.param(layer_name(prefix, 'b', l));
    h = tape.affine(w, b, h, layer_spec[l + 1], layer_spec[l]);
    if (l + 2 < layer_spec.size()) h = tape.sigmoid(h);  // output layer stays affine
  }
  return h;
}

std::vector<double> mlp_forward(const ParameterStore& store, std::string_view prefix,
                                std::span<const std::size_t> layer_spec,
                                std::span<const double> input) {
  if (layer_spec.empty() || input.size() != layer_spec[0]) {
    throw ConfigError("mlp input width mismatch");
  }
  Tape tape(store);
  const Tape::Id x = tape.constant(input);
  const Tape::Id out = mlp_graph(tape, prefix, layer_spec, x);
  auto v = tape.value(out);
  return {v.begin(), v.end()};
}

// ---------------------------------------------------------------------------
// Gradient check

double grad_check(ParameterStore& store, const LossFn& loss_fn, double eps) {
  if (eps <= 0.0) throw ConfigError("grad_check requires eps > 0");
  GradientMap grads = GradientMap::zeros_like(store);
  const double loss = loss_fn(store, &grads);
  if (!std::isfinite(loss)) throw NumericError("non-finite loss in grad_check");

  double max_rel = 0.0;
  for (auto& g : store.groups()) {
    if (!g.trainable) continue;
    const auto& ag = grads.group(g.name).values;
    for (std::size_t i = 0; i < g.values.size(); ++i) {
      const double orig = g.values[i];
      g.values[i] = orig + eps;
      const double lp = loss_fn(store, nullptr);
      g.values[i] = orig - eps;
      const double lm = loss_fn(store, nullptr);
      g.values[i] = orig;
      if (!std::isfinite(lp) || !std::isfinite(lm)) {
        throw NumericError("non-finite loss in grad_check");
      }
      const double fd = (lp - lm) / (2.0 * eps);
      const double denom = std::max(std::abs(ag[i]) + std::abs(fd), 1e-6);
      max_rel = std::max(max_rel, std::abs(ag[i] - fd) / denom);
    }
  }
  return max_rel;
}

}  // namespace mmce
