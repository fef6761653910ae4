#pragma once

#include <string>
#include <string_view>

#include "ghr/graph.hpp"
#include "ghr/param_store.hpp"
#include "ghr/random.hpp"
#include "ghr/tape.hpp"

namespace ghr {

enum class Backbone { kGatedGine, kGine };

std::string_view to_string(Backbone b);
Backbone parse_backbone(std::string_view name);

// Uniform in +-sqrt(6 / (rows + cols)).
Tensor glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

// Arc endpoints of a graph as tape indices. Arcs run src -> dst.
struct ArcView {
  SharedIndex src;
  SharedIndex dst;
  SharedIndex edge;
  std::size_t num_nodes = 0;

  static ArcView of(const Graph& g);
};

// Registers one message-passing layer under `prefix`:
//   prefix.norm  1 x m   pre-aggregation RMSNorm scale (init 1)
//   prefix.eps   1 x 1   GINE self weight (init 0)
//   gated: prefix.content, prefix.gate, prefix.out  (m x m each)
//   plain: prefix.mlp1, prefix.mlp2                 (m x m each)
// `out_scale` multiplies the last map of the update (out or mlp2).
void add_layer_params(ParamStore& params, const std::string& prefix, Backbone backbone,
                      std::size_t m, Rng& rng, double out_scale = 1.0);

struct LayerVars {
  Backbone backbone = Backbone::kGatedGine;
  Var norm;
  Var eps;
  Var w1;  // content | mlp1
  Var w2;  // gate    | mlp2
  Var w3;  // out     | unused
};

LayerVars bind_layer(Tape& tape, const ParamStore& params, const std::string& prefix,
                     Backbone backbone);

// (content(X) * swish(gate(X))) projected by out; no biases.
Var swiglu(Tape& tape, Var x, Var content, Var gate, Var out);

// relu(relu(X W1) W2).
Var relu_mlp(Tape& tape, Var x, Var w1, Var w2);

// (1 + eps) h_i + sum_{j -> i} relu(h_j + e_ji); e_arc holds one row per arc.
Var gine_aggregate(Tape& tape, Var h, const ArcView& arcs, Var e_arc, Var eps);

// Message-passing update without the residual: Update(Aggr(RMSNorm(x))).
Var mp_update(Tape& tape, const LayerVars& layer, Var x, const ArcView& arcs, Var e_arc);

// h + SwiGLU(Aggr(RMSNorm(h))).
Var gated_gine_step(Tape& tape, const LayerVars& layer, Var h, const ArcView& arcs, Var e_arc);
// h + MLP(Aggr(RMSNorm(h))).
Var gine_step(Tape& tape, const LayerVars& layer, Var h, const ArcView& arcs, Var e_arc);

}  // namespace ghr
