#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghr/baselines.hpp"
#include "ghr/gradcheck.hpp"
#include "ghr/hierarchy.hpp"
#include "ghr/model.hpp"
#include "ghr/rgg.hpp"
#include "ghr/tape.hpp"

namespace ghr {

enum class LossKind { kL1, kMse };

std::string_view to_string(LossKind k);
LossKind parse_loss_kind(std::string_view name);

enum class LrSchedule { kConstant, kCosine };

std::string_view to_string(LrSchedule s);
LrSchedule parse_lr_schedule(std::string_view name);

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 128;
  std::size_t epochs = 50;
  LossKind loss = LossKind::kL1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_opt = 1e-8;
  std::uint64_t seed = 0;
  std::optional<double> gradient_clip_norm = 1.0;
  std::size_t eval_batch_size = 64;
  // Cosine decays the rate from learning_rate to 0 over all training steps.
  LrSchedule schedule = LrSchedule::kConstant;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j, TrainConfig base = {});

// Sum over steps r = 1..R of gamma^(R - r) * L(pred_r), where L is the
// weighted masked mean (L1 or squared error). Throws EmptyMask.
Var discounted_loss(Tape& tape, std::span<const Var> predictions, Var targets, Var mask,
                    double gamma, LossKind kind);

// Rate for 1-based optimizer step `step` of `total_steps`.
double scheduled_learning_rate(const TrainConfig& cfg, std::size_t step, std::size_t total_steps);

// Bias-corrected adaptive-moment update (step_index starts at 1) with
// optional global-norm clipping beforehand; gradients are zeroed after.
void optimizer_step(ParamStore& params, const TrainConfig& cfg, std::size_t step_index);

// Iteration counts forced at evaluation time (command-line overrides).
struct IterationOverrides {
  std::optional<std::size_t> global_steps;
  std::optional<std::size_t> high_iters;
  std::optional<std::size_t> low_iters;
};

// Common interface over GHR and the flat baselines.
class Model {
 public:
  virtual ~Model() = default;

  virtual std::string variant() const = 0;
  virtual ParamStore& params() = 0;
  virtual const ParamStore& params() const = 0;
  virtual double gamma() const = 0;
  // Builds the hierarchy consumed by forward(); flat models get a trivial one.
  virtual Hierarchy prepare(const Graph& g, Rng& rng) const = 0;
  // Per-step predictions (one entry for models without global recurrence).
  // `inference` selects the inference-time iteration counts.
  virtual std::vector<Var> forward(Tape& tape, const Hierarchy& h, bool inference,
                                   ForwardTrace* trace = nullptr) const = 0;
  virtual void apply_overrides(const IterationOverrides& o) = 0;
  // Iteration counts (R, T_H, T_L or depth) for run metadata.
  virtual nlohmann::json iteration_counts(bool inference) const = 0;
  // {"type": ..., "variant": ..., "config": ...}
  virtual nlohmann::json to_json() const = 0;
};

class GhrModel final : public Model {
 public:
  GhrModel(GHRConfig config, std::uint64_t seed, std::string variant = "ghr");
  GhrModel(GHRConfig config, ParamStore params, std::string variant = "ghr");

  std::string variant() const override { return variant_; }
  ParamStore& params() override { return params_; }
  const ParamStore& params() const override { return params_; }
  double gamma() const override { return config_.gamma; }
  Hierarchy prepare(const Graph& g, Rng& rng) const override;
  std::vector<Var> forward(Tape& tape, const Hierarchy& h, bool inference,
                           ForwardTrace* trace = nullptr) const override;
  void apply_overrides(const IterationOverrides& o) override;
  nlohmann::json iteration_counts(bool inference) const override;
  nlohmann::json to_json() const override;

  const GHRConfig& config() const noexcept { return config_; }

 private:
  GHRConfig config_;
  ParamStore params_;
  std::string variant_;
};

class FlatModel final : public Model {
 public:
  FlatModel(FlatConfig config, std::uint64_t seed, std::string variant = "flat");
  FlatModel(FlatConfig config, ParamStore params, std::string variant = "flat");

  std::string variant() const override { return variant_; }
  ParamStore& params() override { return params_; }
  const ParamStore& params() const override { return params_; }
  double gamma() const override { return config_.gamma; }
  Hierarchy prepare(const Graph& g, Rng& rng) const override;
  std::vector<Var> forward(Tape& tape, const Hierarchy& h, bool inference,
                           ForwardTrace* trace = nullptr) const override;
  void apply_overrides(const IterationOverrides& o) override;
  nlohmann::json iteration_counts(bool inference) const override;
  nlohmann::json to_json() const override;

  const FlatConfig& config() const noexcept { return config_; }

 private:
  FlatConfig config_;
  ParamStore params_;
  std::string variant_;
};

// Rebuilds a model from Model::to_json() plus parameters.
std::unique_ptr<Model> model_from_json(const nlohmann::json& j, ParamStore params);
std::unique_ptr<Model> model_from_json(const nlohmann::json& j, std::uint64_t seed);

// Hierarchies are drawn from sub-stream ("hierarchy/<split>", index) so that
// training and later evaluation see identical pooled graphs.
std::vector<Hierarchy> prepare_hierarchies(const Model& model, std::span<const SSSPInstance> split,
                                           std::uint64_t seed, const std::string& split_name,
                                           std::size_t workers = 1);

// Final-step predictions per instance, evaluated in batches.
std::vector<std::vector<double>> predict(const Model& model, std::span<const SSSPInstance> split,
                                         std::span<const Hierarchy> hierarchies, bool inference,
                                         std::size_t batch_size);

// Mean absolute error over all masked-in nodes of the split.
double masked_mae(std::span<const SSSPInstance> split,
                  const std::vector<std::vector<double>>& predictions);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_mae = 0.0;
  double seconds = 0.0;
};

struct TrainLog {
  std::vector<EpochRecord> epochs;

  // epoch,train_loss,val_mae
  void write_csv(std::ostream& os) const;
  void write_jsonl(std::ostream& os) const;
  // epoch,seconds (wall clock; excluded from the reproducible logs)
  void write_timing_csv(std::ostream& os) const;
};

struct TrainResult {
  TrainLog log;
  double best_val_mae = 0.0;
  std::size_t best_epoch = 0;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

// Mini-batch BPTT training; restores the best-validation parameters.
TrainResult train(Model& model, std::span<const SSSPInstance> train_split,
                  std::span<const SSSPInstance> val_split, const TrainConfig& cfg,
                  const EpochCallback& on_epoch = {});

// Loss builder for discounted_loss(forward(instance)) on a single instance.
LossBuilder instance_loss(const Model& model, const SSSPInstance& instance, const Hierarchy& h,
                          LossKind kind);

GradCheckResult full_model_grad_check(Model& model, const SSSPInstance& instance,
                                      const Hierarchy& h, double step = 1e-5);

}  // namespace ghr
