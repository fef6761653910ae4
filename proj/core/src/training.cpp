#include "ghr/training.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>

#include "ghr/batch.hpp"
#include "ghr/error.hpp"
#include "ghr/parallel.hpp"

namespace ghr {

using nlohmann::json;

std::string_view to_string(LossKind k) { return k == LossKind::kL1 ? "l1" : "mse"; }

LossKind parse_loss_kind(std::string_view name) {
  if (name == "l1") return LossKind::kL1;
  if (name == "mse") return LossKind::kMse;
  fail(ErrorCode::kInvalidConfig, "unknown loss '" + std::string(name) + "'");
}

std::string_view to_string(LrSchedule s) { return s == LrSchedule::kConstant ? "constant" : "cosine"; }

LrSchedule parse_lr_schedule(std::string_view name) {
  if (name == "constant") return LrSchedule::kConstant;
  if (name == "cosine") return LrSchedule::kCosine;
  fail(ErrorCode::kInvalidConfig, "unknown schedule '" + std::string(name) + "'");
}

double scheduled_learning_rate(const TrainConfig& cfg, std::size_t step, std::size_t total_steps) {
  if (cfg.schedule == LrSchedule::kConstant || total_steps == 0) return cfg.learning_rate;
  const double progress = static_cast<double>(step - 1) / static_cast<double>(total_steps);
  return cfg.learning_rate * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

void TrainConfig::validate() const {
  require(learning_rate >= 0.0, ErrorCode::kInvalidConfig, "learning_rate must be >= 0");
  require(batch_size >= 1 && eval_batch_size >= 1, ErrorCode::kInvalidConfig,
          "batch sizes must be >= 1");
  require(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0, ErrorCode::kInvalidConfig,
          "betas must lie in [0, 1)");
  require(!gradient_clip_norm || *gradient_clip_norm >= 0.0, ErrorCode::kInvalidConfig,
          "gradient_clip_norm must be >= 0");
}

json to_json(const TrainConfig& c) {
  json j;
  j["learning_rate"] = c.learning_rate;
  j["batch_size"] = c.batch_size;
  j["epochs"] = c.epochs;
  j["loss"] = std::string(to_string(c.loss));
  j["beta1"] = c.beta1;
  j["beta2"] = c.beta2;
  j["eps_opt"] = c.eps_opt;
  j["seed"] = c.seed;
  j["gradient_clip_norm"] = c.gradient_clip_norm ? json(*c.gradient_clip_norm) : json(nullptr);
  j["eval_batch_size"] = c.eval_batch_size;
  j["schedule"] = std::string(to_string(c.schedule));
  return j;
}

TrainConfig train_config_from_json(const json& j, TrainConfig c) {
  try {
    if (j.contains("learning_rate")) c.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("batch_size")) c.batch_size = j.at("batch_size").get<std::size_t>();
    if (j.contains("epochs")) c.epochs = j.at("epochs").get<std::size_t>();
    if (j.contains("loss")) c.loss = parse_loss_kind(j.at("loss").get<std::string>());
    if (j.contains("beta1")) c.beta1 = j.at("beta1").get<double>();
    if (j.contains("beta2")) c.beta2 = j.at("beta2").get<double>();
    if (j.contains("eps_opt")) c.eps_opt = j.at("eps_opt").get<double>();
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("gradient_clip_norm")) {
      if (j.at("gradient_clip_norm").is_null())
        c.gradient_clip_norm.reset();
      else
        c.gradient_clip_norm = j.at("gradient_clip_norm").get<double>();
    }
    if (j.contains("eval_batch_size")) c.eval_batch_size = j.at("eval_batch_size").get<std::size_t>();
    if (j.contains("schedule")) c.schedule = parse_lr_schedule(j.at("schedule").get<std::string>());
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

Var discounted_loss(Tape& tape, std::span<const Var> predictions, Var targets, Var mask,
                    double gamma, LossKind kind) {
  require(!predictions.empty(), ErrorCode::kInvalidConfig, "discounted_loss needs R >= 1");
  require(gamma > 0.0 && gamma <= 1.0, ErrorCode::kInvalidConfig, "gamma must lie in (0, 1]");
  const std::size_t steps = predictions.size();
  std::optional<Var> total;
  for (std::size_t r = 1; r <= steps; ++r) {
    const Var pred = predictions[r - 1];
    const Var step_loss = kind == LossKind::kL1 ? tape.l1_masked(pred, targets, mask)
                                                : tape.mse_masked(pred, targets, mask);
    const double weight = std::pow(gamma, static_cast<double>(steps - r));
    const Var weighted = weight == 1.0 ? step_loss : tape.scale(step_loss, weight);
    total = total ? tape.add(*total, weighted) : weighted;
  }
  return *total;
}

void optimizer_step(ParamStore& params, const TrainConfig& cfg, std::size_t step_index) {
  require(step_index >= 1, ErrorCode::kInvalidConfig, "optimizer step index starts at 1");
  if (cfg.gradient_clip_norm) {
    const double norm = params.grad_norm();
    if (norm > *cfg.gradient_clip_norm) {
      const double s = *cfg.gradient_clip_norm / norm;
      for (auto& p : params)
        for (auto& g : p.grad.values()) g *= s;
    }
  }
  const double t = static_cast<double>(step_index);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  for (auto& p : params) {
    if (!p.trainable) continue;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double g = p.grad[k];
      double& m = p.first_moment[k];
      double& v = p.second_moment[k];
      m = cfg.beta1 * m + (1.0 - cfg.beta1) * g;
      v = cfg.beta2 * v + (1.0 - cfg.beta2) * g * g;
      const double mhat = m / c1;
      const double vhat = v / c2;
      p.value[k] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.eps_opt);
    }
  }
  params.zero_grad();
}

// ---------------------------------------------------------------- GhrModel

GhrModel::GhrModel(GHRConfig config, std::uint64_t seed, std::string variant)
    : config_(std::move(config)), params_(init_ghr_params(config_, seed)), variant_(std::move(variant)) {}

GhrModel::GhrModel(GHRConfig config, ParamStore params, std::string variant)
    : config_(std::move(config)), params_(std::move(params)), variant_(std::move(variant)) {
  config_.validate();
}

Hierarchy GhrModel::prepare(const Graph& g, Rng& rng) const {
  return build_hierarchy(g, config_.pool_iterations, config_.feature_reduce, config_.edge_reduce, rng);
}

std::vector<Var> GhrModel::forward(Tape& tape, const Hierarchy& h, bool inference,
                                   ForwardTrace* trace) const {
  const GHRConfig cfg = inference ? config_.for_inference() : config_;
  return ghr::forward(tape, h, params_, cfg, trace).predictions;
}

void GhrModel::apply_overrides(const IterationOverrides& o) {
  if (o.global_steps) config_.infer_global_steps = o.global_steps;
  if (o.high_iters) config_.infer_high_iters = o.high_iters;
  if (o.low_iters) config_.infer_low_iters = o.low_iters;
  config_.validate();
}

json GhrModel::iteration_counts(bool inference) const {
  const GHRConfig c = inference ? config_.for_inference() : config_;
  return {{"global_steps", c.global_steps}, {"high_iters", c.high_iters}, {"low_iters", c.low_iters}};
}

json GhrModel::to_json() const {
  return {{"type", "ghr"}, {"variant", variant_}, {"config", ghr::to_json(config_)}};
}

// --------------------------------------------------------------- FlatModel

FlatModel::FlatModel(FlatConfig config, std::uint64_t seed, std::string variant)
    : config_(std::move(config)), params_(init_flat_params(config_, seed)), variant_(std::move(variant)) {}

FlatModel::FlatModel(FlatConfig config, ParamStore params, std::string variant)
    : config_(std::move(config)), params_(std::move(params)), variant_(std::move(variant)) {
  config_.validate();
}

Hierarchy FlatModel::prepare(const Graph& g, Rng&) const {
  return make_hierarchy(g, ClusterAssignment::identity(g.num_nodes()), Reduce::kSum, Reduce::kSum);
}

std::vector<Var> FlatModel::forward(Tape& tape, const Hierarchy& h, bool inference,
                                    ForwardTrace*) const {
  std::size_t iterations = config_.depth;
  if (inference && config_.kind == FlatKind::kRecurrent && config_.infer_depth)
    iterations = *config_.infer_depth;
  return flat_gr_forward(tape, h.low, params_, config_, config_.global_steps, iterations);
}

void FlatModel::apply_overrides(const IterationOverrides& o) {
  if (o.global_steps) config_.global_steps = *o.global_steps;
  // Deep models have a fixed number of layers; only recurrent depth moves.
  if (o.low_iters && config_.kind == FlatKind::kRecurrent) config_.infer_depth = o.low_iters;
  config_.validate();
}

json FlatModel::iteration_counts(bool inference) const {
  std::size_t iterations = config_.depth;
  if (inference && config_.kind == FlatKind::kRecurrent && config_.infer_depth)
    iterations = *config_.infer_depth;
  return {{"global_steps", config_.global_steps}, {"iterations", iterations}};
}

json FlatModel::to_json() const {
  return {{"type", "flat"}, {"variant", variant_}, {"config", ghr::to_json(config_)}};
}

std::unique_ptr<Model> model_from_json(const json& j, ParamStore params) {
  const auto type = j.at("type").get<std::string>();
  const auto variant = j.value("variant", type);
  if (type == "ghr")
    return std::make_unique<GhrModel>(ghr_config_from_json(j.at("config")), std::move(params), variant);
  if (type == "flat")
    return std::make_unique<FlatModel>(flat_config_from_json(j.at("config")), std::move(params), variant);
  fail(ErrorCode::kInvalidConfig, "unknown model type " + type);
}

std::unique_ptr<Model> model_from_json(const json& j, std::uint64_t seed) {
  const auto type = j.at("type").get<std::string>();
  const auto variant = j.value("variant", type);
  if (type == "ghr") return std::make_unique<GhrModel>(ghr_config_from_json(j.at("config")), seed, variant);
  if (type == "flat")
    return std::make_unique<FlatModel>(flat_config_from_json(j.at("config")), seed, variant);
  fail(ErrorCode::kInvalidConfig, "unknown model type " + type);
}

// ---------------------------------------------------------------- training

std::vector<Hierarchy> prepare_hierarchies(const Model& model, std::span<const SSSPInstance> split,
                                           std::uint64_t seed, const std::string& split_name,
                                           std::size_t workers) {
  std::vector<Hierarchy> out(split.size());
  parallel_for(split.size(), workers, [&](std::size_t i) {
    Rng rng = make_rng(seed, "hierarchy/" + split_name, i);
    out[i] = model.prepare(split[i].graph, rng);
  });
  return out;
}

namespace {

Batch batch_of(std::span<const SSSPInstance> split, std::span<const Hierarchy> hierarchies,
               std::span<const std::uint32_t> order, std::size_t begin, std::size_t end) {
  std::vector<const SSSPInstance*> insts;
  std::vector<const Hierarchy*> hs;
  for (std::size_t k = begin; k < end; ++k) {
    const std::size_t i = order.empty() ? k : order[k];
    insts.push_back(&split[i]);
    hs.push_back(&hierarchies[i]);
  }
  return make_batch(insts, hs);
}

}  // namespace

std::vector<std::vector<double>> predict(const Model& model, std::span<const SSSPInstance> split,
                                         std::span<const Hierarchy> hierarchies, bool inference,
                                         std::size_t batch_size) {
  require(split.size() == hierarchies.size(), ErrorCode::kInvalidConfig,
          "one hierarchy per instance required");
  std::vector<std::vector<double>> out;
  out.reserve(split.size());
  for (std::size_t begin = 0; begin < split.size(); begin += batch_size) {
    const std::size_t end = std::min(split.size(), begin + batch_size);
    const Batch b = batch_of(split, hierarchies, {}, begin, end);
    Tape tape;
    const auto preds = model.forward(tape, b.hierarchy, inference);
    const Tensor& last = tape.value(preds.back());
    for (std::size_t k = 0; k + 1 < b.node_offsets.size(); ++k) {
      std::vector<double> p(last.data() + b.node_offsets[k], last.data() + b.node_offsets[k + 1]);
      out.push_back(std::move(p));
    }
  }
  return out;
}

double masked_mae(std::span<const SSSPInstance> split,
                  const std::vector<std::vector<double>>& predictions) {
  require(split.size() == predictions.size(), ErrorCode::kShapeMismatch,
          "one prediction vector per instance required");
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    const auto& inst = split[i];
    require(predictions[i].size() == inst.graph.num_nodes(), ErrorCode::kShapeMismatch,
            "prediction length mismatch");
    for (std::size_t v = 0; v < inst.graph.num_nodes(); ++v) {
      if (!inst.mask[v]) continue;
      sum += std::abs(predictions[i][v] - static_cast<double>(*inst.labels[v]));
      ++count;
    }
  }
  require(count > 0, ErrorCode::kEmptyMask, "no masked-in nodes");
  return sum / static_cast<double>(count);
}

void TrainLog::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "epoch,train_loss,val_mae\n";
  for (const auto& e : epochs) os << e.epoch << ',' << e.train_loss << ',' << e.val_mae << '\n';
  os.precision(old);
}

void TrainLog::write_jsonl(std::ostream& os) const {
  for (const auto& e : epochs)
    os << json{{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_mae", e.val_mae}}.dump() << '\n';
}

void TrainLog::write_timing_csv(std::ostream& os) const {
  os << "epoch,seconds\n";
  for (const auto& e : epochs) os << e.epoch << ',' << e.seconds << '\n';
}

TrainResult train(Model& model, std::span<const SSSPInstance> train_split,
                  std::span<const SSSPInstance> val_split, const TrainConfig& cfg,
                  const EpochCallback& on_epoch) {
  cfg.validate();
  require(!train_split.empty(), ErrorCode::kInvalidConfig, "training split is empty");
  const auto train_h = prepare_hierarchies(model, train_split, cfg.seed, "train");
  const auto val_h = prepare_hierarchies(model, val_split, cfg.seed, "val");

  TrainResult result;
  ParamStore& params = model.params();
  params.zero_grad();
  std::vector<Tensor> best_values;
  const auto snapshot = [&] {
    best_values.clear();
    for (const auto& p : params) best_values.push_back(p.value);
  };
  snapshot();
  result.best_val_mae = std::numeric_limits<double>::infinity();

  std::size_t step = 0;
  const std::size_t batches = (train_split.size() + cfg.batch_size - 1) / cfg.batch_size;
  TrainConfig step_cfg = cfg;
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    Rng shuffle = make_rng(cfg.seed, "shuffle", epoch);
    const auto order = random_permutation(shuffle, train_split.size());
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_size);
      const Batch b = batch_of(train_split, train_h, order, begin, end);
      Tape tape;
      const auto preds = model.forward(tape, b.hierarchy, false);
      const Var loss = discounted_loss(tape, preds, tape.constant(b.targets),
                                       tape.constant(b.weights), model.gamma(), cfg.loss);
      loss_sum += tape.value(loss)[0] * static_cast<double>(end - begin);
      tape.backward(loss, params);
      ++step;
      step_cfg.learning_rate = scheduled_learning_rate(cfg, step, batches * cfg.epochs);
      optimizer_step(params, step_cfg, step);
    }
    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(train_split.size());
    if (!val_split.empty()) {
      rec.val_mae = masked_mae(val_split, predict(model, val_split, val_h, false, cfg.eval_batch_size));
    }
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.log.epochs.push_back(rec);
    if (val_split.empty() || rec.val_mae < result.best_val_mae) {
      result.best_val_mae = rec.val_mae;
      result.best_epoch = epoch;
      snapshot();
    }
    if (on_epoch) on_epoch(rec);
  }
  if (cfg.epochs > 0) {
    for (std::size_t i = 0; i < params.size(); ++i) params[i].value = best_values[i];
  } else if (!val_split.empty()) {
    result.best_val_mae = masked_mae(val_split, predict(model, val_split, val_h, false, cfg.eval_batch_size));
  }
  return result;
}

LossBuilder instance_loss(const Model& model, const SSSPInstance& instance, const Hierarchy& h,
                          LossKind kind) {
  const SSSPInstance* inst = &instance;
  const Hierarchy* hier = &h;
  const Model* m = &model;
  return [m, inst, hier, kind](Tape& tape, const ParamStore&) {
    const SSSPInstance* one[] = {inst};
    const Hierarchy* oneh[] = {hier};
    const Batch b = make_batch(one, oneh);
    const auto preds = m->forward(tape, b.hierarchy, false);
    return discounted_loss(tape, preds, tape.constant(b.targets), tape.constant(b.weights),
                           m->gamma(), kind);
  };
}

GradCheckResult full_model_grad_check(Model& model, const SSSPInstance& instance,
                                      const Hierarchy& h, double step) {
  return finite_difference_check(instance_loss(model, instance, h, LossKind::kL1), model.params(), step);
}

}  // namespace ghr
