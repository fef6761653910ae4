#include "ghr/layers.hpp"

#include <cmath>

#include "ghr/error.hpp"

namespace ghr {

std::string_view to_string(Backbone b) {
  return b == Backbone::kGatedGine ? "gated_gine" : "gine";
}

Backbone parse_backbone(std::string_view name) {
  if (name == "gated_gine") return Backbone::kGatedGine;
  if (name == "gine") return Backbone::kGine;
  fail(ErrorCode::kInvalidConfig, "unknown backbone '" + std::string(name) + "'");
}

Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  Tensor t(rows, cols);
  for (auto& v : t.values()) v = uniform(rng, -bound, bound);
  return t;
}

ArcView ArcView::of(const Graph& g) {
  const auto arcs = g.shared_arcs();
  return ArcView{SharedIndex(arcs, &arcs->src), SharedIndex(arcs, &arcs->dst),
                 SharedIndex(arcs, &arcs->edge), g.num_nodes()};
}

void add_layer_params(ParamStore& params, const std::string& prefix, Backbone backbone,
                      std::size_t m, Rng& rng, double out_scale) {
  const auto scaled = [&](Tensor t) {
    for (auto& v : t.values()) v *= out_scale;
    return t;
  };
  params.add(prefix + ".norm", Tensor::ones(1, m));
  params.add(prefix + ".eps", Tensor(1, 1));
  if (backbone == Backbone::kGatedGine) {
    params.add(prefix + ".content", glorot_uniform(m, m, rng));
    params.add(prefix + ".gate", glorot_uniform(m, m, rng));
    params.add(prefix + ".out", scaled(glorot_uniform(m, m, rng)));
  } else {
    params.add(prefix + ".mlp1", glorot_uniform(m, m, rng));
    params.add(prefix + ".mlp2", scaled(glorot_uniform(m, m, rng)));
  }
}

LayerVars bind_layer(Tape& tape, const ParamStore& params, const std::string& prefix,
                     Backbone backbone) {
  LayerVars v;
  v.backbone = backbone;
  v.norm = tape.param(params, prefix + ".norm");
  v.eps = tape.param(params, prefix + ".eps");
  if (backbone == Backbone::kGatedGine) {
    v.w1 = tape.param(params, prefix + ".content");
    v.w2 = tape.param(params, prefix + ".gate");
    v.w3 = tape.param(params, prefix + ".out");
  } else {
    v.w1 = tape.param(params, prefix + ".mlp1");
    v.w2 = tape.param(params, prefix + ".mlp2");
  }
  return v;
}

Var swiglu(Tape& tape, Var x, Var content, Var gate, Var out) {
  const Var c = tape.matmul(x, content);
  const Var g = tape.swish(tape.matmul(x, gate));
  return tape.matmul(tape.hadamard(c, g), out);
}

Var relu_mlp(Tape& tape, Var x, Var w1, Var w2) {
  return tape.relu(tape.matmul(tape.relu(tape.matmul(x, w1)), w2));
}

Var gine_aggregate(Tape& tape, Var h, const ArcView& arcs, Var e_arc, Var eps) {
  const std::size_t m = tape.value(h).cols();
  require(tape.value(eps).rows() == 1 && tape.value(eps).cols() == 1, ErrorCode::kShapeMismatch,
          "gine_aggregate: eps must be 1 x 1");
  const Var neighborhood = tape.gine_messages(h, e_arc, arcs.src, arcs.dst, arcs.num_nodes);
  const Var eps_row = tape.matmul(eps, tape.constant(Tensor::ones(1, m)));
  const Var self = tape.add(h, tape.hadamard(h, eps_row));
  return tape.add(self, neighborhood);
}

Var mp_update(Tape& tape, const LayerVars& layer, Var x, const ArcView& arcs, Var e_arc) {
  const Var normed = tape.rms_norm(x, layer.norm);
  const Var agg = gine_aggregate(tape, normed, arcs, e_arc, layer.eps);
  if (layer.backbone == Backbone::kGatedGine) return swiglu(tape, agg, layer.w1, layer.w2, layer.w3);
  return relu_mlp(tape, agg, layer.w1, layer.w2);
}

Var gated_gine_step(Tape& tape, const LayerVars& layer, Var h, const ArcView& arcs, Var e_arc) {
  require(layer.backbone == Backbone::kGatedGine, ErrorCode::kInvalidConfig,
          "gated_gine_step needs gated parameters");
  return tape.add(h, mp_update(tape, layer, h, arcs, e_arc));
}

Var gine_step(Tape& tape, const LayerVars& layer, Var h, const ArcView& arcs, Var e_arc) {
  require(layer.backbone == Backbone::kGine, ErrorCode::kInvalidConfig,
          "gine_step needs perceptron parameters");
  return tape.add(h, mp_update(tape, layer, h, arcs, e_arc));
}

}  // namespace ghr
