#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "ghr/param_store.hpp"
#include "ghr/tensor.hpp"

namespace ghr {

using IndexVector = std::vector<std::uint32_t>;
using SharedIndex = std::shared_ptr<const IndexVector>;

SharedIndex make_index(IndexVector idx);

// Closed set of differentiable primitives.
enum class Prim : std::uint8_t {
  kConstant,
  kVariable,
  kParameter,
  kMatMul,
  kAdd,
  kHadamard,
  kRelu,
  kSigmoid,
  kSwish,
  kGatherRows,
  kScatterAddRows,
  kRmsNorm,
  kConcatCols,
  kScale,
  kSumAll,
  kL1Masked,
  kMseMasked,
  kGineMessages,
};

std::string_view to_string(Prim p);

// Handle to a tape entry.
struct Var {
  std::uint32_t id = 0;
};

inline constexpr double kRmsNormFloor = 1e-8;

// Append-only record of primitive applications for reverse-mode
// differentiation. One tape per forward/backward pass; not thread-safe.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  // Leaf that never receives a gradient.
  Var constant(Tensor value);
  // Leaf whose adjoint is kept after backward() (see gradient()).
  Var variable(Tensor value);
  // Leaf bound to a ParamStore entry. Repeated calls return the same Var.
  Var param(const ParamStore& params, std::size_t index);
  Var param(const ParamStore& params, std::string_view name);

  Var matmul(Var a, Var b);
  // Elementwise; either operand may be a 1 x cols row broadcast over rows.
  Var add(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var swish(Var a);
  Var gather_rows(Var x, SharedIndex index);
  // out[index[k]] += values[k], summed in increasing k.
  Var scatter_add_rows(Var values, SharedIndex index, std::size_t out_rows);
  // out[dst[k]] += relu(x[src[k]] + e[k]), summed in increasing k. Equal to
  // scatter_add_rows(relu(add(gather_rows(x, src), e)), dst, out_rows) but
  // keeps no per-arc intermediates on the tape.
  Var gine_messages(Var x, Var e, SharedIndex src, SharedIndex dst, std::size_t out_rows);
  // Row-wise y = w * x / sqrt(mean(x^2) + 1e-8); w is 1 x cols.
  Var rms_norm(Var x, Var w);
  Var concat_cols(Var a, Var b);
  Var scale(Var a, double c);
  Var sum_all(Var a);
  // sum(mask * |pred - target|) / sum(mask); mask holds non-negative weights.
  // target and mask are treated as constants. Throws EmptyMask.
  Var l1_masked(Var pred, Var target, Var mask);
  Var mse_masked(Var pred, Var target, Var mask);

  const Tensor& value(Var v) const { return nodes_[v.id].value; }
  Prim kind(Var v) const { return nodes_[v.id].prim; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Accumulates d loss / d p into params[*].grad for every parameter leaf.
  // Throws LossNotScalar unless loss is 1 x 1.
  void backward(Var loss, ParamStore& params);
  // Adjoint of a variable() leaf from the last backward(); zeros if unused.
  Tensor gradient(Var v) const;

  // Recomputes every entry from the leaves and reports whether the results
  // are bit-identical to the recorded values.
  bool replay_matches() const;

 private:
  struct Node {
    Prim prim = Prim::kConstant;
    bool requires_grad = false;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::uint32_t c = 0;
    std::size_t param_index = 0;
    std::size_t out_rows = 0;
    double scalar = 0.0;
    SharedIndex index;
    SharedIndex index2;
    Tensor value;
    // Per-row inverse RMS for rms_norm.
    std::vector<double> saved;
  };

  Var push(Node node);
  Tensor compute(const Node& n, std::vector<double>* saved) const;
  void backprop(const Node& n, const Tensor& grad, std::vector<Tensor>& adj);

  std::vector<Node> nodes_;
  std::vector<std::int64_t> param_vars_;
  std::vector<Tensor> retained_;
};

}  // namespace ghr
