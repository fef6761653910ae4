#include "ghr/tape.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "ghr/error.hpp"

namespace ghr {

namespace {

enum class Broadcast { kNone, kLeftRow, kRightRow };

Broadcast broadcast_kind(const Tensor& a, const Tensor& b, const char* op) {
  if (a.same_shape(b)) return Broadcast::kNone;
  if (b.rows() == 1 && b.cols() == a.cols()) return Broadcast::kRightRow;
  if (a.rows() == 1 && a.cols() == b.cols()) return Broadcast::kLeftRow;
  fail(ErrorCode::kShapeMismatch, std::string(op) + ": " + std::to_string(a.rows()) + "x" +
                                      std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) +
                                      "x" + std::to_string(b.cols()));
}

inline double sigmoid_of(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Elementwise binary op with optional row broadcast.
template <typename F>
Tensor binary(const Tensor& a, const Tensor& b, Broadcast bc, F f) {
  const std::size_t rows = bc == Broadcast::kLeftRow ? b.rows() : a.rows();
  const std::size_t cols = a.cols();
  Tensor out(rows, cols);
  double* o = out.data();
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double* ra = bc == Broadcast::kLeftRow ? pa : pa + r * cols;
    const double* rb = bc == Broadcast::kRightRow ? pb : pb + r * cols;
    double* ro = o + r * cols;
    for (std::size_t k = 0; k < cols; ++k) ro[k] = f(ra[k], rb[k]);
  }
  return out;
}

// Adds g into acc, reducing over rows when acc is a broadcast row.
void accumulate_reduced(Tensor& acc, const Tensor& g) {
  if (acc.same_shape(g)) {
    double* pa = acc.data();
    const double* pg = g.data();
    for (std::size_t i = 0; i < g.size(); ++i) pa[i] += pg[i];
    return;
  }
  const std::size_t cols = g.cols();
  for (std::size_t r = 0; r < g.rows(); ++r) {
    const double* pg = g.data() + r * cols;
    double* pa = acc.data();
    for (std::size_t k = 0; k < cols; ++k) pa[k] += pg[k];
  }
}

double mask_total(const Tensor& mask) {
  double total = 0.0;
  for (double w : mask.values()) total += w;
  return total;
}

}  // namespace

SharedIndex make_index(IndexVector idx) { return std::make_shared<const IndexVector>(std::move(idx)); }

std::string_view to_string(Prim p) {
  switch (p) {
    case Prim::kConstant: return "constant";
    case Prim::kVariable: return "variable";
    case Prim::kParameter: return "parameter";
    case Prim::kMatMul: return "matmul";
    case Prim::kAdd: return "add";
    case Prim::kHadamard: return "hadamard";
    case Prim::kRelu: return "relu";
    case Prim::kSigmoid: return "sigmoid";
    case Prim::kSwish: return "swish";
    case Prim::kGatherRows: return "gather_rows";
    case Prim::kScatterAddRows: return "scatter_add_rows";
    case Prim::kRmsNorm: return "rms_norm";
    case Prim::kConcatCols: return "concat_cols";
    case Prim::kScale: return "scale_by_constant";
    case Prim::kSumAll: return "sum_all";
    case Prim::kL1Masked: return "l1_masked";
    case Prim::kMseMasked: return "mse_masked";
    case Prim::kGineMessages: return "gine_messages";
  }
  return "unknown";
}

Var Tape::push(Node node) {
  if (node.prim != Prim::kConstant && node.prim != Prim::kVariable &&
      node.prim != Prim::kParameter) {
    node.value = compute(node, &node.saved);
  }
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::constant(Tensor value) {
  Node n;
  n.prim = Prim::kConstant;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::variable(Tensor value) {
  Node n;
  n.prim = Prim::kVariable;
  n.requires_grad = true;
  n.value = std::move(value);
  return push(std::move(n));
}

Var Tape::param(const ParamStore& params, std::size_t index) {
  require(index < params.size(), ErrorCode::kIndexOutOfRange, "parameter index");
  if (param_vars_.size() < params.size()) param_vars_.resize(params.size(), -1);
  if (param_vars_[index] >= 0) return Var{static_cast<std::uint32_t>(param_vars_[index])};
  Node n;
  n.prim = Prim::kParameter;
  n.param_index = index;
  n.requires_grad = params[index].trainable;
  n.value = params[index].value;
  const Var v = push(std::move(n));
  param_vars_[index] = v.id;
  return v;
}

Var Tape::param(const ParamStore& params, std::string_view name) {
  return param(params, params.index(name));
}

Var Tape::matmul(Var a, Var b) {
  const auto& va = value(a);
  const auto& vb = value(b);
  require(va.cols() == vb.rows(), ErrorCode::kShapeMismatch,
          "matmul: " + std::to_string(va.rows()) + "x" + std::to_string(va.cols()) + " times " +
              std::to_string(vb.rows()) + "x" + std::to_string(vb.cols()));
  Node n;
  n.prim = Prim::kMatMul;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  broadcast_kind(value(a), value(b), "add");
  Node n;
  n.prim = Prim::kAdd;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(std::move(n));
}

Var Tape::hadamard(Var a, Var b) {
  broadcast_kind(value(a), value(b), "hadamard");
  Node n;
  n.prim = Prim::kHadamard;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(std::move(n));
}

Var Tape::relu(Var a) {
  Node n;
  n.prim = Prim::kRelu;
  n.a = a.id;
  n.requires_grad = nodes_[a.id].requires_grad;
  return push(std::move(n));
}

Var Tape::sigmoid(Var a) {
  Node n;
  n.prim = Prim::kSigmoid;
  n.a = a.id;
  n.requires_grad = nodes_[a.id].requires_grad;
  return push(std::move(n));
}

Var Tape::swish(Var a) {
  Node n;
  n.prim = Prim::kSwish;
  n.a = a.id;
  n.requires_grad = nodes_[a.id].requires_grad;
  return push(std::move(n));
}

Var Tape::gather_rows(Var x, SharedIndex index) {
  require(index != nullptr, ErrorCode::kIndexOutOfRange, "gather_rows: null index");
  const auto rows = value(x).rows();
  for (auto i : *index)
    require(i < rows, ErrorCode::kIndexOutOfRange,
            "gather_rows: index " + std::to_string(i) + " >= " + std::to_string(rows));
  Node n;
  n.prim = Prim::kGatherRows;
  n.a = x.id;
  n.index = std::move(index);
  n.requires_grad = nodes_[x.id].requires_grad;
  return push(std::move(n));
}

Var Tape::scatter_add_rows(Var values, SharedIndex index, std::size_t out_rows) {
  require(index != nullptr, ErrorCode::kIndexOutOfRange, "scatter_add_rows: null index");
  require(index->size() == value(values).rows(), ErrorCode::kShapeMismatch,
          "scatter_add_rows: index length must equal value rows");
  for (auto i : *index)
    require(i < out_rows, ErrorCode::kIndexOutOfRange,
            "scatter_add_rows: index " + std::to_string(i) + " >= " + std::to_string(out_rows));
  Node n;
  n.prim = Prim::kScatterAddRows;
  n.a = values.id;
  n.index = std::move(index);
  n.out_rows = out_rows;
  n.requires_grad = nodes_[values.id].requires_grad;
  return push(std::move(n));
}

Var Tape::gine_messages(Var x, Var e, SharedIndex src, SharedIndex dst, std::size_t out_rows) {
  require(src != nullptr && dst != nullptr, ErrorCode::kIndexOutOfRange, "gine_messages: null index");
  const Tensor& vx = value(x);
  const Tensor& ve = value(e);
  require(src->size() == ve.rows() && dst->size() == ve.rows() && vx.cols() == ve.cols(),
          ErrorCode::kShapeMismatch, "gine_messages: one edge row per arc required");
  for (auto i : *src)
    require(i < vx.rows(), ErrorCode::kIndexOutOfRange, "gine_messages: source index out of range");
  for (auto i : *dst)
    require(i < out_rows, ErrorCode::kIndexOutOfRange, "gine_messages: target index out of range");
  Node n;
  n.prim = Prim::kGineMessages;
  n.a = x.id;
  n.b = e.id;
  n.index = std::move(src);
  n.index2 = std::move(dst);
  n.out_rows = out_rows;
  n.requires_grad = nodes_[x.id].requires_grad || nodes_[e.id].requires_grad;
  return push(std::move(n));
}

Var Tape::rms_norm(Var x, Var w) {
  require(value(w).rows() == 1 && value(w).cols() == value(x).cols() && value(x).cols() >= 1,
          ErrorCode::kShapeMismatch, "rms_norm: weight must be 1 x cols");
  Node n;
  n.prim = Prim::kRmsNorm;
  n.a = x.id;
  n.b = w.id;
  n.requires_grad = nodes_[x.id].requires_grad || nodes_[w.id].requires_grad;
  return push(std::move(n));
}

Var Tape::concat_cols(Var a, Var b) {
  require(value(a).rows() == value(b).rows(), ErrorCode::kShapeMismatch,
          "concat_cols: row counts differ");
  Node n;
  n.prim = Prim::kConcatCols;
  n.a = a.id;
  n.b = b.id;
  n.requires_grad = nodes_[a.id].requires_grad || nodes_[b.id].requires_grad;
  return push(std::move(n));
}

Var Tape::scale(Var a, double c) {
  Node n;
  n.prim = Prim::kScale;
  n.a = a.id;
  n.scalar = c;
  n.requires_grad = nodes_[a.id].requires_grad;
  return push(std::move(n));
}

Var Tape::sum_all(Var a) {
  Node n;
  n.prim = Prim::kSumAll;
  n.a = a.id;
  n.requires_grad = nodes_[a.id].requires_grad;
  return push(std::move(n));
}

Var Tape::l1_masked(Var pred, Var target, Var mask) {
  require(value(pred).same_shape(value(target)) && value(pred).same_shape(value(mask)),
          ErrorCode::kShapeMismatch, "l1_masked: pred, target and mask shapes differ");
  require(mask_total(value(mask)) > 0.0, ErrorCode::kEmptyMask, "l1_masked: mask selects nothing");
  Node n;
  n.prim = Prim::kL1Masked;
  n.a = pred.id;
  n.b = target.id;
  n.c = mask.id;
  n.requires_grad = nodes_[pred.id].requires_grad;
  return push(std::move(n));
}

Var Tape::mse_masked(Var pred, Var target, Var mask) {
  require(value(pred).same_shape(value(target)) && value(pred).same_shape(value(mask)),
          ErrorCode::kShapeMismatch, "mse_masked: pred, target and mask shapes differ");
  require(mask_total(value(mask)) > 0.0, ErrorCode::kEmptyMask, "mse_masked: mask selects nothing");
  Node n;
  n.prim = Prim::kMseMasked;
  n.a = pred.id;
  n.b = target.id;
  n.c = mask.id;
  n.requires_grad = nodes_[pred.id].requires_grad;
  return push(std::move(n));
}

Tensor Tape::compute(const Node& n, std::vector<double>* saved) const {
  const Tensor& a = nodes_[n.a].value;
  switch (n.prim) {
    case Prim::kConstant:
    case Prim::kVariable:
    case Prim::kParameter:
      return n.value;
    case Prim::kMatMul: {
      const Tensor& b = nodes_[n.b].value;
      Tensor out(a.rows(), b.cols());
      matmul_into(a, false, b, false, out, false);
      return out;
    }
    case Prim::kAdd: {
      const Tensor& b = nodes_[n.b].value;
      return binary(a, b, broadcast_kind(a, b, "add"), [](double x, double y) { return x + y; });
    }
    case Prim::kHadamard: {
      const Tensor& b = nodes_[n.b].value;
      return binary(a, b, broadcast_kind(a, b, "hadamard"),
                    [](double x, double y) { return x * y; });
    }
    case Prim::kRelu: {
      Tensor out(a.rows(), a.cols());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
      return out;
    }
    case Prim::kSigmoid: {
      Tensor out(a.rows(), a.cols());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = sigmoid_of(a[i]);
      return out;
    }
    case Prim::kSwish: {
      Tensor out(a.rows(), a.cols());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * sigmoid_of(a[i]);
      return out;
    }
    case Prim::kGatherRows: {
      const auto& idx = *n.index;
      const std::size_t cols = a.cols();
      Tensor out(idx.size(), cols);
      for (std::size_t k = 0; k < idx.size(); ++k)
        std::copy_n(a.data() + idx[k] * cols, cols, out.data() + k * cols);
      return out;
    }
    case Prim::kScatterAddRows: {
      const auto& idx = *n.index;
      const std::size_t cols = a.cols();
      Tensor out(n.out_rows, cols);
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double* src = a.data() + k * cols;
        double* dst = out.data() + idx[k] * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
      }
      return out;
    }
    case Prim::kGineMessages: {
      const Tensor& e = nodes_[n.b].value;
      const auto& src = *n.index;
      const auto& dst = *n.index2;
      const std::size_t cols = a.cols();
      Tensor out(n.out_rows, cols);
      for (std::size_t k = 0; k < src.size(); ++k) {
        const double* xs = a.data() + src[k] * cols;
        const double* ek = e.data() + k * cols;
        double* o = out.data() + dst[k] * cols;
        for (std::size_t c = 0; c < cols; ++c) {
          const double m = xs[c] + ek[c];
          o[c] += m > 0.0 ? m : 0.0;
        }
      }
      return out;
    }
    case Prim::kRmsNorm: {
      const Tensor& w = nodes_[n.b].value;
      const std::size_t cols = a.cols();
      Tensor out(a.rows(), cols);
      if (saved) saved->resize(a.rows());
      for (std::size_t r = 0; r < a.rows(); ++r) {
        const double* x = a.data() + r * cols;
        double ss = 0.0;
        for (std::size_t c = 0; c < cols; ++c) ss += x[c] * x[c];
        const double inv = 1.0 / std::sqrt(ss / static_cast<double>(cols) + kRmsNormFloor);
        if (saved) (*saved)[r] = inv;
        double* y = out.data() + r * cols;
        for (std::size_t c = 0; c < cols; ++c) y[c] = w[c] * x[c] * inv;
      }
      return out;
    }
    case Prim::kConcatCols: {
      const Tensor& b = nodes_[n.b].value;
      Tensor out(a.rows(), a.cols() + b.cols());
      for (std::size_t r = 0; r < a.rows(); ++r) {
        std::copy_n(a.data() + r * a.cols(), a.cols(), out.data() + r * out.cols());
        std::copy_n(b.data() + r * b.cols(), b.cols(), out.data() + r * out.cols() + a.cols());
      }
      return out;
    }
    case Prim::kScale: {
      Tensor out(a.rows(), a.cols());
      for (std::size_t i = 0; i < a.size(); ++i) out[i] = n.scalar * a[i];
      return out;
    }
    case Prim::kSumAll: {
      double s = 0.0;
      for (double v : a.values()) s += v;
      return Tensor(1, 1, s);
    }
    case Prim::kL1Masked:
    case Prim::kMseMasked: {
      const Tensor& t = nodes_[n.b].value;
      const Tensor& m = nodes_[n.c].value;
      double num = 0.0;
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - t[i];
        num += m[i] * (n.prim == Prim::kL1Masked ? std::abs(d) : d * d);
      }
      return Tensor(1, 1, num / mask_total(m));
    }
  }
  return {};
}

void Tape::backprop(const Node& n, const Tensor& g, std::vector<Tensor>& adj) {
  const auto wants = [&](std::uint32_t id) { return nodes_[id].requires_grad; };
  const auto slot = [&](std::uint32_t id) -> Tensor& {
    Tensor& t = adj[id];
    if (t.empty() && nodes_[id].value.size() > 0)
      t = Tensor(nodes_[id].value.rows(), nodes_[id].value.cols());
    return t;
  };
  const Tensor& a = nodes_[n.a].value;
  switch (n.prim) {
    case Prim::kConstant:
    case Prim::kVariable:
    case Prim::kParameter:
      return;
    case Prim::kMatMul: {
      const Tensor& b = nodes_[n.b].value;
      if (wants(n.a)) matmul_into(g, false, b, true, slot(n.a), true);
      if (wants(n.b)) matmul_into(a, true, g, false, slot(n.b), true);
      return;
    }
    case Prim::kAdd: {
      if (wants(n.a)) accumulate_reduced(slot(n.a), g);
      if (wants(n.b)) accumulate_reduced(slot(n.b), g);
      return;
    }
    case Prim::kHadamard: {
      const Tensor& b = nodes_[n.b].value;
      const auto bc = broadcast_kind(a, b, "hadamard");
      if (wants(n.a)) {
        const Tensor ga = binary(g, b, bc == Broadcast::kRightRow ? bc : Broadcast::kNone,
                                 [](double x, double y) { return x * y; });
        accumulate_reduced(slot(n.a), ga);
      }
      if (wants(n.b)) {
        const Tensor gb = binary(g, a, bc == Broadcast::kLeftRow ? Broadcast::kRightRow : Broadcast::kNone,
                                 [](double x, double y) { return x * y; });
        accumulate_reduced(slot(n.b), gb);
      }
      return;
    }
    case Prim::kRelu: {
      if (!wants(n.a)) return;
      Tensor& t = slot(n.a);
      for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > 0.0) t[i] += g[i];
      return;
    }
    case Prim::kSigmoid: {
      if (!wants(n.a)) return;
      Tensor& t = slot(n.a);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = n.value[i];
        t[i] += g[i] * s * (1.0 - s);
      }
      return;
    }
    case Prim::kSwish: {
      if (!wants(n.a)) return;
      Tensor& t = slot(n.a);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double s = sigmoid_of(a[i]);
        t[i] += g[i] * (s + a[i] * s * (1.0 - s));
      }
      return;
    }
    case Prim::kGatherRows: {
      if (!wants(n.a)) return;
      Tensor& t = slot(n.a);
      const auto& idx = *n.index;
      const std::size_t cols = a.cols();
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double* src = g.data() + k * cols;
        double* dst = t.data() + idx[k] * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
      }
      return;
    }
    case Prim::kScatterAddRows: {
      if (!wants(n.a)) return;
      Tensor& t = slot(n.a);
      const auto& idx = *n.index;
      const std::size_t cols = a.cols();
      for (std::size_t k = 0; k < idx.size(); ++k) {
        const double* src = g.data() + idx[k] * cols;
        double* dst = t.data() + k * cols;
        for (std::size_t c = 0; c < cols; ++c) dst[c] += src[c];
      }
      return;
    }
    case Prim::kGineMessages: {
      const Tensor& e = nodes_[n.b].value;
      const auto& src = *n.index;
      const auto& dst = *n.index2;
      const std::size_t cols = a.cols();
      Tensor* tx = wants(n.a) ? &slot(n.a) : nullptr;
      Tensor* te = wants(n.b) ? &slot(n.b) : nullptr;
      for (std::size_t k = 0; k < src.size(); ++k) {
        const double* xs = a.data() + src[k] * cols;
        const double* ek = e.data() + k * cols;
        const double* gd = g.data() + dst[k] * cols;
        for (std::size_t c = 0; c < cols; ++c) {
          if (xs[c] + ek[c] <= 0.0) continue;
          if (tx) (*tx)[src[k] * cols + c] += gd[c];
          if (te) (*te)[k * cols + c] += gd[c];
        }
      }
      return;
    }
    case Prim::kRmsNorm: {
      const Tensor& w = nodes_[n.b].value;
      const std::size_t cols = a.cols();
      const double inv_d = 1.0 / static_cast<double>(cols);
      Tensor* tx = wants(n.a) ? &slot(n.a) : nullptr;
      Tensor* tw = wants(n.b) ? &slot(n.b) : nullptr;
      for (std::size_t r = 0; r < a.rows(); ++r) {
        const double inv = n.saved[r];
        const double* x = a.data() + r * cols;
        const double* gr = g.data() + r * cols;
        if (tw) {
          for (std::size_t c = 0; c < cols; ++c) (*tw)[c] += gr[c] * x[c] * inv;
        }
        if (tx) {
          // dx = inv * (g*w - xhat * mean(g*w*xhat)), xhat = x * inv.
          double dot = 0.0;
          for (std::size_t c = 0; c < cols; ++c) dot += gr[c] * w[c] * x[c] * inv;
          dot *= inv_d;
          double* dx = tx->data() + r * cols;
          for (std::size_t c = 0; c < cols; ++c)
            dx[c] += inv * (gr[c] * w[c] - x[c] * inv * dot);
        }
      }
      return;
    }
    case Prim::kConcatCols: {
      const Tensor& b = nodes_[n.b].value;
      const std::size_t gc = g.cols();
      if (wants(n.a)) {
        Tensor& t = slot(n.a);
        for (std::size_t r = 0; r < a.rows(); ++r)
          for (std::size_t c = 0; c < a.cols(); ++c) t(r, c) += g.data()[r * gc + c];
      }
      if (wants(n.b)) {
        Tensor& t = slot(n.b);
        for (std::size_t r = 0; r < b.rows(); ++r)
          for (std::size_t c = 0; c < b.cols(); ++c) t(r, c) += g.data()[r * gc + a.cols() + c];
      }
      return;
    }
    case Prim::kScale: {
      if (!wants(n.a)) return;
      Tensor& t = slot(n.a);
      for (std::size_t i = 0; i < a.size(); ++i) t[i] += n.scalar * g[i];
      return;
    }
    case Prim::kSumAll: {
      if (!wants(n.a)) return;
      Tensor& t = slot(n.a);
      for (std::size_t i = 0; i < a.size(); ++i) t[i] += g[0];
      return;
    }
    case Prim::kL1Masked:
    case Prim::kMseMasked: {
      if (!wants(n.a)) return;
      const Tensor& tgt = nodes_[n.b].value;
      const Tensor& m = nodes_[n.c].value;
      const double k = g[0] / mask_total(m);
      Tensor& t = slot(n.a);
      for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - tgt[i];
        if (n.prim == Prim::kL1Masked)
          t[i] += k * m[i] * (d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0));
        else
          t[i] += k * m[i] * 2.0 * d;
      }
      return;
    }
  }
}

void Tape::backward(Var loss, ParamStore& params) {
  const Tensor& lv = value(loss);
  require(lv.rows() == 1 && lv.cols() == 1, ErrorCode::kLossNotScalar,
          "loss is " + std::to_string(lv.rows()) + "x" + std::to_string(lv.cols()));
  std::vector<Tensor> adj(nodes_.size());
  retained_.assign(nodes_.size(), Tensor());
  adj[loss.id] = Tensor(1, 1, 1.0);
  for (std::int64_t i = loss.id; i >= 0; --i) {
    const auto id = static_cast<std::size_t>(i);
    const Node& n = nodes_[id];
    if (!n.requires_grad || adj[id].empty()) continue;
    if (n.prim == Prim::kParameter) {
      require(n.param_index < params.size(), ErrorCode::kIndexOutOfRange,
              "tape references a parameter outside the store");
      Tensor& pg = params[n.param_index].grad;
      for (std::size_t k = 0; k < pg.size(); ++k) pg[k] += adj[id][k];
    } else if (n.prim == Prim::kVariable) {
      retained_[id] = std::move(adj[id]);
      continue;
    } else {
      backprop(n, adj[id], adj);
    }
    adj[id] = Tensor();
  }
}

Tensor Tape::gradient(Var v) const {
  if (v.id < retained_.size() && !retained_[v.id].empty()) return retained_[v.id];
  return Tensor(value(v).rows(), value(v).cols());
}

bool Tape::replay_matches() const {
  for (const auto& n : nodes_) {
    std::vector<double> saved;
    const Tensor again = compute(n, &saved);
    if (again.rows() != n.value.rows() || again.cols() != n.value.cols()) return false;
    if (!std::equal(again.values().begin(), again.values().end(), n.value.values().begin(),
                    [](double x, double y) { return std::bit_cast<std::uint64_t>(x) ==
                                                    std::bit_cast<std::uint64_t>(y); }))
      return false;
  }
  return true;
}

}  // namespace ghr
