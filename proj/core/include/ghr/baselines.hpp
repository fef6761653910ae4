#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghr/graph.hpp"
#include "ghr/layers.hpp"
#include "ghr/param_store.hpp"
#include "ghr/tape.hpp"

namespace ghr {

enum class FlatKind { kDeep, kRecurrent };

std::string_view to_string(FlatKind k);

// Flat (hierarchy-free) baselines mirroring GHR's low-level module.
// Every iteration applies h <- h + MP_k(f_L + RMSNorm_k(h), e_L) on the input
// graph; Deep uses a distinct layer per iteration, Recurrent shares one.
struct FlatConfig {
  FlatKind kind = FlatKind::kDeep;
  Backbone backbone = Backbone::kGine;
  std::size_t hidden = 32;
  // Deep: number of distinct layers. Recurrent: training iteration count.
  std::size_t depth = 10;
  // Iterations per global step at inference (Recurrent only).
  std::optional<std::size_t> infer_depth;
  // Global recurrent steps; > 1 selects the "+GR" variant with per-step
  // readouts and the discounted loss.
  std::size_t global_steps = 1;
  double gamma = 0.8;
  std::size_t node_feature_dim = 1;
  std::size_t edge_feature_dim = 1;
  double residual_init_scale = 1.0;

  void validate() const;
  std::size_t layer_sets() const { return kind == FlatKind::kDeep ? depth : 1; }
};

nlohmann::json to_json(const FlatConfig& c);
FlatConfig flat_config_from_json(const nlohmann::json& j, FlatConfig base = {});

// Parameter names: enc.node, enc.edge_low, layer{k}.* and layer{k}.state_norm
// for k < layer_sets(), readout, z.low (frozen).
ParamStore init_flat_params(const FlatConfig& config, std::uint64_t seed);

// R global steps of T iterations each. Iteration t of every step uses layer
// t (Deep) or the shared layer (Recurrent). One prediction per step.
std::vector<Var> flat_gr_forward(Tape& tape, const Graph& g, const ParamStore& params,
                                 const FlatConfig& config, std::size_t global_steps,
                                 std::size_t iterations);

// encode -> N distinct layers -> readout.
Var deep_forward(Tape& tape, const Graph& g, const ParamStore& params, const FlatConfig& config,
                 std::size_t layers);

// Shared layer applied T times with the encoded input injected each time.
Var recurrent_forward(Tape& tape, const Graph& g, const ParamStore& params,
                      const FlatConfig& config, std::size_t iterations);

}  // namespace ghr
