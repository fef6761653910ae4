#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghr/hierarchy.hpp"
#include "ghr/layers.hpp"
#include "ghr/param_store.hpp"
#include "ghr/tape.hpp"

namespace ghr {

struct GHRConfig {
  std::size_t hidden = 32;        // m
  std::size_t global_steps = 4;   // R
  std::size_t high_iters = 3;     // T_H
  std::size_t low_iters = 6;      // T_L
  double gamma = 0.8;
  Backbone backbone = Backbone::kGatedGine;
  bool time_informed = false;
  bool edge_readout = false;
  std::size_t node_feature_dim = 1;
  std::size_t edge_feature_dim = 1;
  // Multiplier on the initial last map of each update; 1 is plain Glorot.
  double residual_init_scale = 1.0;
  double unpool_init_scale = 1.0;
  // Pooling used to build the high-level graph.
  std::size_t pool_iterations = 3;
  Reduce feature_reduce = Reduce::kMax;
  Reduce edge_reduce = Reduce::kSum;
  // Iteration counts used at inference when set.
  std::optional<std::size_t> infer_global_steps;
  std::optional<std::size_t> infer_high_iters;
  std::optional<std::size_t> infer_low_iters;

  void validate() const;
  // Copy with the inference overrides applied to R, T_H, T_L.
  GHRConfig for_inference() const;
};

nlohmann::json to_json(const GHRConfig& c);
GHRConfig ghr_config_from_json(const nlohmann::json& j, GHRConfig base = {});

// Parameter names:
//   enc.node (d_n x m), enc.edge_low (d_e x m), enc.edge_high (d_e x m),
//   low.* and high.* (message-passing layers), unpool (m x m),
//   norm.low / norm.high (1 x m state norms), readout (m x 1) or
//   readout.edge (3m x 1), time (2 x m, time-informed only),
//   z.low / z.high (1 x m, frozen initial states).
ParamStore init_ghr_params(const GHRConfig& config, std::uint64_t seed);

// Encoded inputs; constant over the whole forward pass.
struct EncodedInputs {
  Var f_low;        // |V_L| x m
  Var e_low_edge;   // |E_L| x m
  Var e_low;        // per low arc, m
  Var e_high;       // per high arc, m
};

struct HiddenState {
  Var low;   // |V_L| x m
  Var high;  // |V_H| x m
};

// All GHR parameters bound to one tape.
struct GhrVars {
  Backbone backbone = Backbone::kGatedGine;
  Var enc_node, enc_edge_low, enc_edge_high;
  LayerVars low_mp, high_mp;
  Var unpool;
  Var norm_low, norm_high;
  Var readout;
  std::optional<Var> time;
  Var z_low, z_high;
  bool edge_readout = false;
};

GhrVars bind_ghr(Tape& tape, const ParamStore& params, const GHRConfig& config);

EncodedInputs encode(Tape& tape, const Hierarchy& h, const GhrVars& vars);
HiddenState init_state(Tape& tape, const Hierarchy& h, const GhrVars& vars);

// Differentiable Pool / Unpool over the hierarchy's assignment.
Var pool_on_tape(Tape& tape, Var x, const Hierarchy& h);
Var unpool_on_tape(Tape& tape, Var x_high, const Hierarchy& h);

// g_H + MP_H(norm(g_H) + Pool(norm(g_L)), e_H).
Var high_update(Tape& tape, Var g_high, Var g_low, Var e_high, const Hierarchy& h,
                const GhrVars& vars);

// g_L + MP_L(f_L + norm(g_L) + Unpool(g_H) W_unpool [+ (t_H, t_L) W_time], e_L).
Var low_update(Tape& tape, Var g_high, Var g_low, Var f_low, Var e_low, const Hierarchy& h,
               const GhrVars& vars, std::size_t t_high, std::size_t t_low);

// Records the order of sub-updates executed by forward passes.
struct ForwardTrace {
  struct Event {
    char level;  // 'H' or 'L'
    std::size_t step;
    std::size_t t_high;
    std::size_t t_low;
  };
  std::size_t high_updates = 0;
  std::size_t low_updates = 0;
  std::vector<Event> events;
  bool record_events = false;
};

HiddenState global_step(Tape& tape, const HiddenState& state, const EncodedInputs& enc,
                        const Hierarchy& h, const GhrVars& vars, const GHRConfig& config,
                        ForwardTrace* trace = nullptr, std::size_t step = 0);

Var node_readout(Tape& tape, Var h_low, Var weight);
// Per low edge {i, j} with i < j: [h_i, h_j, e] W.
Var edge_readout(Tape& tape, Var h_low, Var e_low_edge, const Graph& g, Var weight);

struct ForwardResult {
  std::vector<Var> predictions;  // one per global step
  HiddenState state;
};

// R global steps from the initial state, reading out after every step.
ForwardResult forward(Tape& tape, const Hierarchy& h, const ParamStore& params,
                      const GHRConfig& config, ForwardTrace* trace = nullptr);

}  // namespace ghr
