#include "ghr/baselines.hpp"

#include <cmath>

#include "ghr/error.hpp"
#include "ghr/random.hpp"

namespace ghr {

using nlohmann::json;

std::string_view to_string(FlatKind k) { return k == FlatKind::kDeep ? "deep" : "recurrent"; }

void FlatConfig::validate() const {
  require(hidden >= 1 && depth >= 1 && global_steps >= 1, ErrorCode::kInvalidConfig,
          "flat model sizes must be >= 1");
  require(!infer_depth || *infer_depth >= 1, ErrorCode::kInvalidConfig, "infer_depth must be >= 1");
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::kInvalidConfig, "gamma must lie in (0, 1]");
}

json to_json(const FlatConfig& c) {
  json j;
  j["kind"] = std::string(to_string(c.kind));
  j["backbone"] = std::string(to_string(c.backbone));
  j["hidden"] = c.hidden;
  j["depth"] = c.depth;
  j["infer_depth"] = c.infer_depth ? json(*c.infer_depth) : json(nullptr);
  j["global_steps"] = c.global_steps;
  j["gamma"] = c.gamma;
  j["node_feature_dim"] = c.node_feature_dim;
  j["edge_feature_dim"] = c.edge_feature_dim;
  j["residual_init_scale"] = c.residual_init_scale;
  return j;
}

FlatConfig flat_config_from_json(const json& j, FlatConfig c) {
  try {
    if (j.contains("kind")) {
      const auto k = j.at("kind").get<std::string>();
      require(k == "deep" || k == "recurrent", ErrorCode::kInvalidConfig, "unknown flat kind " + k);
      c.kind = k == "deep" ? FlatKind::kDeep : FlatKind::kRecurrent;
    }
    if (j.contains("backbone")) c.backbone = parse_backbone(j.at("backbone").get<std::string>());
    if (j.contains("hidden")) c.hidden = j.at("hidden").get<std::size_t>();
    if (j.contains("depth")) c.depth = j.at("depth").get<std::size_t>();
    if (j.contains("infer_depth")) {
      if (j.at("infer_depth").is_null())
        c.infer_depth.reset();
      else
        c.infer_depth = j.at("infer_depth").get<std::size_t>();
    }
    if (j.contains("global_steps")) c.global_steps = j.at("global_steps").get<std::size_t>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    if (j.contains("node_feature_dim")) c.node_feature_dim = j.at("node_feature_dim").get<std::size_t>();
    if (j.contains("edge_feature_dim")) c.edge_feature_dim = j.at("edge_feature_dim").get<std::size_t>();
    if (j.contains("residual_init_scale")) c.residual_init_scale = j.at("residual_init_scale").get<double>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

ParamStore init_flat_params(const FlatConfig& config, std::uint64_t seed) {
  config.validate();
  const std::size_t m = config.hidden;
  Rng rng = make_rng(seed, "init");
  ParamStore p;
  p.add("enc.node", glorot_uniform(config.node_feature_dim, m, rng));
  p.add("enc.edge_low", glorot_uniform(config.edge_feature_dim, m, rng));
  for (std::size_t k = 0; k < config.layer_sets(); ++k) {
    const std::string prefix = "layer" + std::to_string(k);
    add_layer_params(p, prefix, config.backbone, m, rng, config.residual_init_scale);
    p.add(prefix + ".state_norm", Tensor::ones(1, m));
  }
  p.add("readout", glorot_uniform(m, 1, rng));
  const double sd = 1.0 / std::sqrt(static_cast<double>(m));
  Tensor z(1, m);
  for (auto& v : z.values()) v = sd * standard_normal(rng);
  p.add("z.low", std::move(z), false);
  return p;
}

std::vector<Var> flat_gr_forward(Tape& tape, const Graph& g, const ParamStore& params,
                                 const FlatConfig& config, std::size_t global_steps,
                                 std::size_t iterations) {
  require(global_steps >= 1 && iterations >= 1, ErrorCode::kInvalidConfig,
          "global steps and iterations must be >= 1");
  require(config.kind == FlatKind::kRecurrent || iterations <= config.depth,
          ErrorCode::kInvalidConfig, "deep model has only " + std::to_string(config.depth) + " layers");
  require(g.node_features().cols() == params.at("enc.node").value.rows(), ErrorCode::kShapeMismatch,
          "node feature dimension does not match encoder");
  const ArcView arcs = ArcView::of(g);
  const Var f_low = tape.matmul(tape.constant(g.node_features()), tape.param(params, "enc.node"));
  const Var e_edge =
      tape.matmul(tape.constant(g.edge_features()), tape.param(params, "enc.edge_low"));
  const Var e_low = tape.gather_rows(e_edge, arcs.edge);
  const Var readout = tape.param(params, "readout");

  std::vector<LayerVars> layers;
  std::vector<Var> state_norms;
  const std::size_t sets = config.kind == FlatKind::kDeep ? iterations : 1;
  for (std::size_t k = 0; k < sets; ++k) {
    const std::string prefix = "layer" + std::to_string(k);
    layers.push_back(bind_layer(tape, params, prefix, config.backbone));
    state_norms.push_back(tape.param(params, prefix + ".state_norm"));
  }

  Var h = tape.gather_rows(tape.param(params, "z.low"), make_index(IndexVector(g.num_nodes(), 0)));
  std::vector<Var> predictions;
  for (std::size_t r = 0; r < global_steps; ++r) {
    for (std::size_t t = 0; t < iterations; ++t) {
      const std::size_t k = sets == 1 ? 0 : t;
      const Var input = tape.add(f_low, tape.rms_norm(h, state_norms[k]));
      h = tape.add(h, mp_update(tape, layers[k], input, arcs, e_low));
    }
    predictions.push_back(tape.matmul(h, readout));
  }
  return predictions;
}

Var deep_forward(Tape& tape, const Graph& g, const ParamStore& params, const FlatConfig& config,
                 std::size_t layers) {
  require(config.kind == FlatKind::kDeep, ErrorCode::kInvalidConfig, "deep_forward needs a deep config");
  return flat_gr_forward(tape, g, params, config, 1, layers).back();
}

Var recurrent_forward(Tape& tape, const Graph& g, const ParamStore& params,
                      const FlatConfig& config, std::size_t iterations) {
  require(config.kind == FlatKind::kRecurrent, ErrorCode::kInvalidConfig,
          "recurrent_forward needs a recurrent config");
  return flat_gr_forward(tape, g, params, config, 1, iterations).back();
}

}  // namespace ghr
