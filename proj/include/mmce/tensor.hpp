#pragma once

// Minimal deterministic differentiable-computation substrate: named parameter
// groups, a vector-valued reverse-mode tape over a fixed op set, a
// finite-difference gradient checker, and an Adam step.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mmce/errors.hpp"

namespace mmce {

class ParameterStore {
 public:
  struct Group {
    std::string name;
    std::vector<double> values;
    bool trainable = true;
  };

  void add_group(std::string name, std::vector<double> values, bool trainable = true);
  bool has_group(std::string_view name) const;
  Group& group(std::string_view name);
  const Group& group(std::string_view name) const;
  std::span<const Group> groups() const { return groups_; }
  std::span<Group> groups() { return {groups_.data(), groups_.size()}; }
  void set_trainable(std::string_view name, bool trainable);
  std::size_t total_size() const;

 private:
  std::vector<Group> groups_;
};

struct GradientMap {
  struct Group {
    std::string name;
    std::vector<double> values;
  };
  std::vector<Group> groups;

  static GradientMap zeros_like(const ParameterStore& store);
  void zero();
  Group& group(std::string_view name);
  const Group& group(std::string_view name) const;
  void scale(double s);
};

struct OptimState {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  GradientMap m;  // first moments
  GradientMap v;  // second moments

  static OptimState init(const ParameterStore& store, double lr = 1e-3);
};

// Adam update on trainable groups only; frozen groups stay bit-identical.
// Throws NumericError naming the group on a non-finite gradient.
void optimizer_step(ParameterStore& store, const GradientMap& grads, OptimState& state);

// ---------------------------------------------------------------------------
// Reverse-mode tape

class Tape {
 public:
  using Id = std::int32_t;

  // grads may be null for pure evaluation; backward() then throws UsageError.
  explicit Tape(const ParameterStore& store, GradientMap* grads = nullptr);

  Id param(std::string_view group_name);
  Id constant(std::span<const double> values);
  Id constant(double value);
  // y = W x + b with W row-major (rows x cols), b length rows.
  Id affine(Id w, Id b, Id x, std::size_t rows, std::size_t cols);
  Id slice(Id x, std::size_t offset, std::size_t len);
  Id sigmoid(Id x);
  Id softplus(Id x);
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);
  Id scale(Id x, double c);
  Id shift(Id x, double c);
  Id sum(Id x);
  Id dot_const(Id x, std::span<const double> weights);

  std::span<const double> value(Id id) const;
  double scalar(Id id) const;

  // Accumulates seed * d(loss)/d(param) into the GradientMap. Parameters of
  // non-trainable groups receive exact zeros (their gradients are discarded).
  void backward(Id loss, double seed = 1.0);

  // Clears all nodes, keeps arena capacity.
  void reset();

 private:
  enum class Op : std::uint8_t {
    Param, Const, Affine, Slice, Sigmoid, Softplus,
    Add, Sub, Mul, Scale, Shift, Sum, DotConst,
  };
  struct Node {
    Op op;
    Id a = -1, b = -1, c = -1;
    std::size_t rows = 0, cols = 0;  // Affine dims; Slice offset in rows
    double k = 0.0;                  // Scale/Shift constant
    const double* val = nullptr;
    double* grad = nullptr;          // points into grad arena or GradientMap
    std::size_t len = 0;
    std::size_t group_index = 0;     // Param only
  };

  const double* arena_alloc(std::span<const double> values);
  double* grad_alloc(std::size_t len);
  Id push(Node n);
  void check_id(Id id) const;

  const ParameterStore& store_;
  GradientMap* grads_;
  std::vector<Node> nodes_;
  std::vector<std::vector<double>> val_chunks_;
  std::vector<std::vector<double>> grad_chunks_;
  bool forward_done_ = false;
};

// ---------------------------------------------------------------------------

// Feed-forward pass through groups named "<prefix>W<k>"/"<prefix>b<k>" with
// sigmoid hidden activations and an affine output layer. layer_spec holds the
// widths [in, h1, ..., out].
std::vector<double> mlp_forward(const ParameterStore& store, std::string_view prefix,
                                std::span<const std::size_t> layer_spec,
                                std::span<const double> input);

// Adds the W/b groups for an MLP with fan-in scaled uniform init.
void mlp_init(ParameterStore& store, std::string_view prefix,
              std::span<const std::size_t> layer_spec, std::uint64_t seed);

// Builds the same MLP on a tape; returns output node id.
Tape::Id mlp_graph(Tape& tape, std::string_view prefix,
                   std::span<const std::size_t> layer_spec, Tape::Id input);

// Maximum relative error between reverse-mode and central finite differences
// over all trainable parameters. loss_fn must be a pure scalar function that
// evaluates the loss on a tape built over the given store.
using LossFn = std::function<double(const ParameterStore&, GradientMap*)>;
double grad_check(ParameterStore& store, const LossFn& loss_fn, double eps);

}  // namespace mmce
