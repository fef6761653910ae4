#include "ghr/config.hpp"

#include <algorithm>
#include <fstream>

#include "ghr/error.hpp"

namespace ghr {

using nlohmann::json;

void RunConfig::validate() const {
  data.validate();
  model.validate();
  train.validate();
  require(baselines.deep_depth >= 1 && baselines.recurrent_depth >= 1 && baselines.gr_steps >= 1 &&
              baselines.gr_iterations >= 1,
          ErrorCode::kInvalidConfig, "baseline depths must be >= 1");
  require(!ablation_seeds.empty(), ErrorCode::kInvalidConfig, "ablation needs at least one seed");
  for (const auto& v : ablation_variants)
    require(std::find(known_variants().begin(), known_variants().end(), v) != known_variants().end(),
            ErrorCode::kInvalidConfig, "unknown variant " + v);
  require(workers >= 1, ErrorCode::kInvalidConfig, "workers must be >= 1");
}

std::uint32_t RunConfig::train_cap() const {
  return data.distance_cap.value_or(data.test_ceiling);
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.preset = name;
  if (name == "small_oor") {
    c.data.n_min = 40;
    c.data.n_max = 60;
    c.data.test_n_min = 40;
    c.data.test_n_max = 60;
    c.data.distance_cap = 5;
    c.data.test_ceiling = 8;
    c.data.train_size = 2000;
    c.data.val_size = 200;
    c.data.test_size = 200;
    c.model.low_iters = 4;
    c.model.high_iters = 3;
    c.model.global_steps = 4;
    c.model.residual_init_scale = 0.1;
    c.model.unpool_init_scale = 0.01;
    c.train.schedule = LrSchedule::kCosine;
    c.train.batch_size = 32;
    c.train.epochs = 30;
    c.baselines.deep_depth = 10;
    c.baselines.recurrent_depth = 10;
    c.baselines.recurrent_infer_depth = 15;
    c.baselines.gr_steps = 4;
    c.baselines.gr_iterations = 12;
  } else if (name == "large_oor") {
    c.data.n_min = 300;
    c.data.n_max = 350;
    c.data.test_n_min = 300;
    c.data.test_n_max = 500;
    c.data.distance_cap = 20;
    c.data.test_ceiling = 40;
    c.data.train_size = 2000;
    c.data.val_size = 200;
    c.data.test_size = 200;
    c.model.low_iters = 6;
    c.model.high_iters = 3;
    c.model.global_steps = 4;
    c.model.infer_low_iters = 8;
    c.model.residual_init_scale = 0.1;
    c.model.unpool_init_scale = 0.01;
    c.train.schedule = LrSchedule::kCosine;
    c.train.batch_size = 16;
    c.train.epochs = 30;
    c.baselines.deep_depth = 20;
    c.baselines.recurrent_depth = 20;
    c.baselines.recurrent_infer_depth = 30;
    c.baselines.gr_steps = 4;
    c.baselines.gr_iterations = 18;
  } else {
    fail(ErrorCode::kInvalidConfig, "unknown preset '" + name + "'");
  }
  c.ablation_variants = known_variants();
  return c;
}

namespace {

BaselineSettings baselines_from_json(const json& j, BaselineSettings b) {
  if (j.contains("deep_depth")) b.deep_depth = j.at("deep_depth").get<std::size_t>();
  if (j.contains("recurrent_depth")) b.recurrent_depth = j.at("recurrent_depth").get<std::size_t>();
  if (j.contains("recurrent_infer_depth")) {
    const auto& v = j.at("recurrent_infer_depth");
    b.recurrent_infer_depth = v.is_null() ? std::nullopt : std::optional(v.get<std::size_t>());
  }
  if (j.contains("gr_steps")) b.gr_steps = j.at("gr_steps").get<std::size_t>();
  if (j.contains("gr_iterations")) b.gr_iterations = j.at("gr_iterations").get<std::size_t>();
  return b;
}

}  // namespace

RunConfig run_config_from_json(const json& j) {
  try {
    RunConfig c = preset_config(j.value("preset", std::string("small_oor")));
    if (j.contains("data")) c.data = rgg_config_from_json(j.at("data"), c.data);
    if (j.contains("model")) c.model = ghr_config_from_json(j.at("model"), c.model);
    if (j.contains("train")) c.train = train_config_from_json(j.at("train"), c.train);
    if (j.contains("baselines")) c.baselines = baselines_from_json(j.at("baselines"), c.baselines);
    if (j.contains("ablation")) {
      const auto& a = j.at("ablation");
      if (a.contains("variants")) c.ablation_variants = a.at("variants").get<std::vector<std::string>>();
      if (a.contains("seeds")) c.ablation_seeds = a.at("seeds").get<std::vector<std::uint64_t>>();
    }
    if (j.contains("paths")) {
      const auto& p = j.at("paths");
      if (p.contains("dataset")) c.dataset_dir = p.at("dataset").get<std::string>();
      if (p.contains("out")) c.out_dir = p.at("out").get<std::string>();
    }
    if (j.contains("workers")) c.workers = j.at("workers").get<std::size_t>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, std::string("config: ") + e.what());
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::kIo, "cannot open config " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, "config " + path.string() + ": " + e.what());
  }
  RunConfig c = run_config_from_json(j);
  // Relative paths are taken relative to the config file.
  const auto base = path.parent_path();
  if (c.dataset_dir.is_relative()) c.dataset_dir = base / c.dataset_dir;
  if (c.out_dir.is_relative()) c.out_dir = base / c.out_dir;
  return c;
}

json to_json(const RunConfig& c) {
  json b{{"deep_depth", c.baselines.deep_depth},
         {"recurrent_depth", c.baselines.recurrent_depth},
         {"recurrent_infer_depth", c.baselines.recurrent_infer_depth
                                       ? json(*c.baselines.recurrent_infer_depth)
                                       : json(nullptr)},
         {"gr_steps", c.baselines.gr_steps},
         {"gr_iterations", c.baselines.gr_iterations}};
  return {{"preset", c.preset},
          {"data", to_json(c.data)},
          {"model", to_json(c.model)},
          {"train", to_json(c.train)},
          {"baselines", b},
          {"ablation", {{"variants", c.ablation_variants}, {"seeds", c.ablation_seeds}}},
          {"paths", {{"dataset", c.dataset_dir.string()}, {"out", c.out_dir.string()}}},
          {"workers", c.workers}};
}

const std::vector<std::string>& known_variants() {
  static const std::vector<std::string> v{"ghr_gated_gine",  "ghr_gine",       "deep_gine",
                                          "deep_gated_gine", "recurrent_gine", "recurrent_gated_gine",
                                          "deep+gr",         "recurrent+gr"};
  return v;
}

std::unique_ptr<Model> make_variant(const RunConfig& cfg, const std::string& variant,
                                    std::uint64_t seed) {
  if (variant == "ghr_gated_gine" || variant == "ghr_gine") {
    GHRConfig m = cfg.model;
    m.backbone = variant == "ghr_gine" ? Backbone::kGine : Backbone::kGatedGine;
    return std::make_unique<GhrModel>(m, seed, variant);
  }
  FlatConfig f;
  f.hidden = cfg.model.hidden;
  f.gamma = cfg.model.gamma;
  f.node_feature_dim = cfg.model.node_feature_dim;
  f.edge_feature_dim = cfg.model.edge_feature_dim;
  f.residual_init_scale = cfg.model.residual_init_scale;
  const auto& b = cfg.baselines;
  if (variant == "deep_gine" || variant == "deep_gated_gine") {
    f.kind = FlatKind::kDeep;
    f.backbone = variant == "deep_gine" ? Backbone::kGine : Backbone::kGatedGine;
    f.depth = b.deep_depth;
  } else if (variant == "recurrent_gine" || variant == "recurrent_gated_gine") {
    f.kind = FlatKind::kRecurrent;
    f.backbone = variant == "recurrent_gine" ? Backbone::kGine : Backbone::kGatedGine;
    f.depth = b.recurrent_depth;
    f.infer_depth = b.recurrent_infer_depth;
  } else if (variant == "deep+gr" || variant == "recurrent+gr") {
    f.kind = variant == "deep+gr" ? FlatKind::kDeep : FlatKind::kRecurrent;
    f.backbone = Backbone::kGatedGine;
    f.depth = b.gr_iterations;
    f.global_steps = b.gr_steps;
  } else {
    fail(ErrorCode::kInvalidConfig, "unknown variant " + variant);
  }
  return std::make_unique<FlatModel>(f, seed, variant);
}

}  // namespace ghr
