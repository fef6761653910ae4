#include "ghr/model.hpp"

#include <cmath>

#include "ghr/error.hpp"
#include "ghr/random.hpp"

namespace ghr {

using nlohmann::json;

void GHRConfig::validate() const {
  require(hidden >= 1, ErrorCode::kInvalidConfig, "hidden dimension must be >= 1");
  require(global_steps >= 1 && high_iters >= 1 && low_iters >= 1, ErrorCode::kInvalidConfig,
          "R, T_H and T_L must be >= 1");
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::kInvalidConfig, "gamma must lie in (0, 1]");
  require(node_feature_dim >= 1 && edge_feature_dim >= 1, ErrorCode::kInvalidConfig,
          "feature dimensions must be >= 1");
  require(pool_iterations >= 1, ErrorCode::kInvalidConfig, "pool_iterations must be >= 1");
  for (const auto& o : {infer_global_steps, infer_high_iters, infer_low_iters})
    require(!o || *o >= 1, ErrorCode::kInvalidConfig, "inference iteration counts must be >= 1");
}

GHRConfig GHRConfig::for_inference() const {
  GHRConfig c = *this;
  if (infer_global_steps) c.global_steps = *infer_global_steps;
  if (infer_high_iters) c.high_iters = *infer_high_iters;
  if (infer_low_iters) c.low_iters = *infer_low_iters;
  return c;
}

json to_json(const GHRConfig& c) {
  json j;
  j["hidden"] = c.hidden;
  j["global_steps"] = c.global_steps;
  j["high_iters"] = c.high_iters;
  j["low_iters"] = c.low_iters;
  j["gamma"] = c.gamma;
  j["backbone"] = std::string(to_string(c.backbone));
  j["time_informed"] = c.time_informed;
  j["edge_readout"] = c.edge_readout;
  j["node_feature_dim"] = c.node_feature_dim;
  j["edge_feature_dim"] = c.edge_feature_dim;
  j["residual_init_scale"] = c.residual_init_scale;
  j["unpool_init_scale"] = c.unpool_init_scale;
  j["pool_iterations"] = c.pool_iterations;
  j["feature_reduce"] = std::string(to_string(c.feature_reduce));
  j["edge_reduce"] = std::string(to_string(c.edge_reduce));
  const auto opt = [](const std::optional<std::size_t>& o) { return o ? json(*o) : json(nullptr); };
  j["infer_global_steps"] = opt(c.infer_global_steps);
  j["infer_high_iters"] = opt(c.infer_high_iters);
  j["infer_low_iters"] = opt(c.infer_low_iters);
  return j;
}

GHRConfig ghr_config_from_json(const json& j, GHRConfig c) {
  try {
    const auto size = [&](const char* key, std::size_t& out) {
      if (j.contains(key)) out = j.at(key).get<std::size_t>();
    };
    const auto opt = [&](const char* key, std::optional<std::size_t>& out) {
      if (!j.contains(key)) return;
      if (j.at(key).is_null())
        out.reset();
      else
        out = j.at(key).get<std::size_t>();
    };
    size("hidden", c.hidden);
    size("global_steps", c.global_steps);
    size("high_iters", c.high_iters);
    size("low_iters", c.low_iters);
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("backbone")) c.backbone = parse_backbone(j.at("backbone").get<std::string>());
    if (j.contains("time_informed")) c.time_informed = j.at("time_informed").get<bool>();
    if (j.contains("edge_readout")) c.edge_readout = j.at("edge_readout").get<bool>();
    size("node_feature_dim", c.node_feature_dim);
    size("edge_feature_dim", c.edge_feature_dim);
    if (j.contains("residual_init_scale")) c.residual_init_scale = j.at("residual_init_scale").get<double>();
    if (j.contains("unpool_init_scale")) c.unpool_init_scale = j.at("unpool_init_scale").get<double>();
    size("pool_iterations", c.pool_iterations);
    if (j.contains("feature_reduce"))
      c.feature_reduce = parse_reduce(j.at("feature_reduce").get<std::string>());
    if (j.contains("edge_reduce")) c.edge_reduce = parse_reduce(j.at("edge_reduce").get<std::string>());
    opt("infer_global_steps", c.infer_global_steps);
    opt("infer_high_iters", c.infer_high_iters);
    opt("infer_low_iters", c.infer_low_iters);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

ParamStore init_ghr_params(const GHRConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t m = config.hidden;
  Rng rng = make_rng(seed, "init");
  ParamStore p;
  p.add("enc.node", glorot_uniform(config.node_feature_dim, m, rng));
  p.add("enc.edge_low", glorot_uniform(config.edge_feature_dim, m, rng));
  p.add("enc.edge_high", glorot_uniform(config.edge_feature_dim, m, rng));
  add_layer_params(p, "low", config.backbone, m, rng, config.residual_init_scale);
  add_layer_params(p, "high", config.backbone, m, rng, config.residual_init_scale);
  Tensor unpool = glorot_uniform(m, m, rng);
  for (double& v : unpool.values()) v *= config.unpool_init_scale;
  p.add("unpool", std::move(unpool));
  p.add("norm.low", Tensor::ones(1, m));
  p.add("norm.high", Tensor::ones(1, m));
  if (config.edge_readout)
    p.add("readout.edge", glorot_uniform(3 * m, 1, rng));
  else
    p.add("readout", glorot_uniform(m, 1, rng));
  if (config.time_informed) p.add("time", glorot_uniform(2, m, rng));
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  Tensor z_low(1, m), z_high(1, m);
  for (auto& v : z_low.values()) v = sd * standard_normal(rng);
  for (auto& v : z_high.values()) v = sd * standard_normal(rng);
  p.add("z.low", std::move(z_low), false);
  p.add("z.high", std::move(z_high), false);
  return p;
}

GhrVars bind_ghr(Tape& tape, const ParamStore& params, const GHRConfig& config) {
  GhrVars v;
  v.backbone = config.backbone;
  v.enc_node = tape.param(params, "enc.node");
  v.enc_edge_low = tape.param(params, "enc.edge_low");
  v.enc_edge_high = tape.param(params, "enc.edge_high");
  v.low_mp = bind_layer(tape, params, "low", config.backbone);
  v.high_mp = bind_layer(tape, params, "high", config.backbone);
  v.unpool = tape.param(params, "unpool");
  v.norm_low = tape.param(params, "norm.low");
  v.norm_high = tape.param(params, "norm.high");
  v.edge_readout = config.edge_readout;
  v.readout = tape.param(params, config.edge_readout ? "readout.edge" : "readout");
  if (config.time_informed) v.time = tape.param(params, "time");
  v.z_low = tape.param(params, "z.low");
  v.z_high = tape.param(params, "z.high");
  return v;
}

EncodedInputs encode(Tape& tape, const Hierarchy& h, const GhrVars& vars) {
  const Tensor& x = h.low.node_features();
  require(x.cols() == tape.value(vars.enc_node).rows(), ErrorCode::kShapeMismatch,
          "node feature dimension does not match encoder");
  require(h.low.edge_features().cols() == tape.value(vars.enc_edge_low).rows() &&
              h.high.edge_features().cols() == tape.value(vars.enc_edge_high).rows(),
          ErrorCode::kShapeMismatch, "edge feature dimension does not match encoder");
  EncodedInputs enc;
  enc.f_low = tape.matmul(tape.constant(x), vars.enc_node);
  enc.e_low_edge = tape.matmul(tape.constant(h.low.edge_features()), vars.enc_edge_low);
  enc.e_low = tape.gather_rows(enc.e_low_edge, ArcView::of(h.low).edge);
  const Var e_high_edge = tape.matmul(tape.constant(h.high.edge_features()), vars.enc_edge_high);
  enc.e_high = tape.gather_rows(e_high_edge, ArcView::of(h.high).edge);
  return enc;
}

HiddenState init_state(Tape& tape, const Hierarchy& h, const GhrVars& vars) {
  return {tape.gather_rows(vars.z_low, make_index(IndexVector(h.low.num_nodes(), 0))),
          tape.gather_rows(vars.z_high, make_index(IndexVector(h.high.num_nodes(), 0)))};
}

Var pool_on_tape(Tape& tape, Var x, const Hierarchy& h) {
  const std::size_t clusters = h.assignment.num_clusters;
  switch (h.feature_reduce) {
    case Reduce::kSum:
      return tape.scatter_add_rows(x, h.cluster_index, clusters);
    case Reduce::kMean: {
      const std::size_t m = tape.value(x).cols();
      Tensor inv(clusters, m);
      for (std::size_t c = 0; c < clusters; ++c)
        for (std::size_t k = 0; k < m; ++k) inv(c, k) = h.pool_plan->inverse_size[c];
      return tape.hadamard(tape.scatter_add_rows(x, h.cluster_index, clusters),
                           tape.constant(std::move(inv)));
    }
    case Reduce::kMax: {
      // Running maximum over member slots: cur + relu(next - cur).
      const auto& slots = h.pool_plan->slots;
      const auto slot_index = [&](std::size_t k) {
        return SharedIndex(h.pool_plan, &slots[k]);
      };
      Var cur = tape.gather_rows(x, slot_index(0));
      for (std::size_t k = 1; k < slots.size(); ++k) {
        const Var next = tape.gather_rows(x, slot_index(k));
        cur = tape.add(cur, tape.relu(tape.add(next, tape.scale(cur, -1.0))));
      }
      return cur;
    }
  }
  return x;
}

Var unpool_on_tape(Tape& tape, Var x_high, const Hierarchy& h) {
  return tape.gather_rows(x_high, h.cluster_index);
}

Var high_update(Tape& tape, Var g_high, Var g_low, Var e_high, const Hierarchy& h,
                const GhrVars& vars) {
  const Var high_hat = tape.rms_norm(g_high, vars.norm_high);
  const Var low_hat = tape.rms_norm(g_low, vars.norm_low);
  const Var input = tape.add(high_hat, pool_on_tape(tape, low_hat, h));
  return tape.add(g_high, mp_update(tape, vars.high_mp, input, ArcView::of(h.high), e_high));
}

Var low_update(Tape& tape, Var g_high, Var g_low, Var f_low, Var e_low, const Hierarchy& h,
               const GhrVars& vars, std::size_t t_high, std::size_t t_low) {
  const Var low_hat = tape.rms_norm(g_low, vars.norm_low);
  // Unpool(g_H) W'' computed as Unpool(g_H W''): identical rows, fewer flops.
  const Var from_high = unpool_on_tape(tape, tape.matmul(g_high, vars.unpool), h);
  Var input = tape.add(tape.add(f_low, low_hat), from_high);
  if (vars.time) {
    const Var stamp = tape.constant(Tensor{{static_cast<double>(t_high), static_cast<double>(t_low)}});
    input = tape.add(input, tape.matmul(stamp, *vars.time));
  }
  return tape.add(g_low, mp_update(tape, vars.low_mp, input, ArcView::of(h.low), e_low));
}

HiddenState global_step(Tape& tape, const HiddenState& state, const EncodedInputs& enc,
                        const Hierarchy& h, const GhrVars& vars, const GHRConfig& config,
                        ForwardTrace* trace, std::size_t step) {
  Var g_high = state.high;
  Var g_low = state.low;
  for (std::size_t t_high = 1; t_high <= config.high_iters; ++t_high) {
    g_high = high_update(tape, g_high, g_low, enc.e_high, h, vars);
    if (trace) {
      ++trace->high_updates;
      if (trace->record_events) trace->events.push_back({'H', step, t_high, 0});
    }
    for (std::size_t t_low = 1; t_low <= config.low_iters; ++t_low) {
      g_low = low_update(tape, g_high, g_low, enc.f_low, enc.e_low, h, vars, t_high, t_low);
      if (trace) {
        ++trace->low_updates;
        if (trace->record_events) trace->events.push_back({'L', step, t_high, t_low});
      }
    }
  }
  return {g_low, g_high};
}

Var node_readout(Tape& tape, Var h_low, Var weight) {
  require(tape.value(weight).rows() == tape.value(h_low).cols() && tape.value(weight).cols() == 1,
          ErrorCode::kShapeMismatch, "node readout weight must be m x 1");
  return tape.matmul(h_low, weight);
}

Var edge_readout(Tape& tape, Var h_low, Var e_low_edge, const Graph& g, Var weight) {
  const std::size_t m = tape.value(h_low).cols();
  require(tape.value(weight).rows() == 3 * m && tape.value(weight).cols() == 1,
          ErrorCode::kShapeMismatch, "edge readout weight must be 3m x 1");
  IndexVector first, second;
  first.reserve(g.num_edges());
  second.reserve(g.num_edges());
  for (const auto& [a, b] : g.edges()) {
    first.push_back(std::min(a, b));
    second.push_back(std::max(a, b));
  }
  const Var hi = tape.gather_rows(h_low, make_index(std::move(first)));
  const Var hj = tape.gather_rows(h_low, make_index(std::move(second)));
  return tape.matmul(tape.concat_cols(tape.concat_cols(hi, hj), e_low_edge), weight);
}

ForwardResult forward(Tape& tape, const Hierarchy& h, const ParamStore& params,
                      const GHRConfig& config, ForwardTrace* trace) {
  config.validate();
  const GhrVars vars = bind_ghr(tape, params, config);
  const EncodedInputs enc = encode(tape, h, vars);
  ForwardResult result;
  result.state = init_state(tape, h, vars);
  for (std::size_t r = 1; r <= config.global_steps; ++r) {
    result.state = global_step(tape, result.state, enc, h, vars, config, trace, r);
    result.predictions.push_back(
        vars.edge_readout ? edge_readout(tape, result.state.low, enc.e_low_edge, h.low, vars.readout)
                          : node_readout(tape, result.state.low, vars.readout));
  }
  return result;
}

}  // namespace ghr
