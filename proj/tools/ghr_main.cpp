// Command-line front end: gen, train, eval, pool-stats, ablate, selfcheck.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "ghr/checkpoint.hpp"
#include "ghr/checks.hpp"
#include "ghr/config.hpp"
#include "ghr/error.hpp"
#include "ghr/eval.hpp"
#include "ghr/hierarchy.hpp"
#include "ghr/rgg.hpp"
#include "ghr/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::size_t> t_low, t_high, r;
  std::string out;
  std::string dataset;
  std::string checkpoint;
  std::string split = "test";
  std::string variant = "ghr_gated_gine";
  bool training_iterations = false;
  std::size_t bin_width = 10;
};

enum Exit { kOk = 0, kValidation = 1, kRuntime = 2 };

ghr::RunConfig resolve_config(const Options& o) {
  ghr::RunConfig c = o.config.empty() ? ghr::preset_config("small_oor") : ghr::load_run_config(o.config);
  if (o.seed) {
    c.data.seed = *o.seed;
    c.train.seed = *o.seed;
  }
  if (o.workers) c.workers = *o.workers;
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.dataset.empty()) c.dataset_dir = o.dataset;
  c.validate();
  return c;
}

ghr::IterationOverrides overrides(const Options& o) { return {o.r, o.t_high, o.t_low}; }

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  ghr::require(!ec, ghr::ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  ghr::require(static_cast<bool>(os), ghr::ErrorCode::kIo, "cannot write " + path.string());
  return os;
}

const std::vector<ghr::SSSPInstance>& pick_split(const ghr::DatasetSplits& d, const std::string& name) {
  if (name == "train") return d.train;
  if (name == "val") return d.val;
  if (name == "test") return d.test;
  ghr::fail(ghr::ErrorCode::kInvalidConfig, "unknown split " + name);
}

void write_report(const fs::path& dir, const std::string& stem, const ghr::EvalReport& r) {
  open_out(dir / (stem + ".json")) << r.to_json().dump(2) << '\n';
  auto csv = open_out(dir / (stem + ".csv"));
  r.write_csv(csv);
}

int cmd_gen(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto splits = ghr::build_splits(cfg.data, cfg.workers, cfg.preset);
  ensure_dir(cfg.dataset_dir);
  ghr::write_dataset(cfg.dataset_dir, splits);
  std::cout << "wrote " << splits.train.size() << '/' << splits.val.size() << '/' << splits.test.size()
            << " instances to " << cfg.dataset_dir.string() << '\n';
  return kOk;
}

int cmd_train(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto data = ghr::read_dataset(cfg.dataset_dir);
  auto model = ghr::make_variant(cfg, o.variant, cfg.train.seed);
  ensure_dir(cfg.out_dir);
  const auto result = ghr::train(*model, data.train, data.val, cfg.train, [](const ghr::EpochRecord& e) {
    std::cerr << "epoch " << e.epoch << " loss " << e.train_loss << " val_mae " << e.val_mae << '\n';
  });
  const json header{{"model", model->to_json()},
                    {"train_cap", cfg.train_cap()},
                    {"train", ghr::to_json(cfg.train)},
                    {"best_epoch", result.best_epoch},
                    {"best_val_mae", result.best_val_mae}};
  ghr::save_checkpoint(cfg.out_dir / "checkpoint.bin", model->params(), header);
  {
    auto os = open_out(cfg.out_dir / "train_log.csv");
    result.log.write_csv(os);
  }
  {
    auto os = open_out(cfg.out_dir / "train_log.jsonl");
    result.log.write_jsonl(os);
  }
  {
    auto os = open_out(cfg.out_dir / "timing.csv");
    result.log.write_timing_csv(os);
  }
  std::cout.precision(17);
  std::cout << "best val_mae " << result.best_val_mae << " at epoch " << result.best_epoch << '\n';
  return kOk;
}

int cmd_eval(const Options& o) {
  const auto cfg = resolve_config(o);
  const fs::path ckpt_path = o.checkpoint.empty() ? cfg.out_dir / "checkpoint.bin" : fs::path(o.checkpoint);
  auto ckpt = ghr::load_checkpoint(ckpt_path);
  const json& header = ckpt.header.at("config");
  auto model = ghr::model_from_json(header.at("model"), std::move(ckpt.params));
  model->apply_overrides(overrides(o));
  const bool inference = !o.training_iterations;
  const auto data = ghr::read_dataset(cfg.dataset_dir);
  const auto& split = pick_split(data, o.split);
  const auto seed = header.at("train").at("seed").get<std::uint64_t>();
  const auto hs = ghr::prepare_hierarchies(*model, split, seed, o.split, cfg.workers);
  const auto preds = ghr::predict(*model, split, hs, inference, cfg.train.eval_batch_size);
  const auto report = ghr::id_oor_report(preds, split, header.at("train_cap").get<std::uint32_t>());
  ensure_dir(cfg.out_dir);
  write_report(cfg.out_dir, "eval_" + o.split, report);
  open_out(cfg.out_dir / ("eval_" + o.split + "_meta.json"))
      << json{{"variant", model->variant()},
              {"split", o.split},
              {"iterations", model->iteration_counts(inference)}}
             .dump(2)
      << '\n';
  std::cout.precision(17);
  std::cout << "mae " << ghr::masked_mae(split, preds) << " id_mae "
            << (report.id_mae ? std::to_string(*report.id_mae) : "-") << " oor_mae "
            << (report.oor_mae ? std::to_string(*report.oor_mae) : "-") << " max_pred "
            << report.max_predicted_distance << '\n';
  return kOk;
}

int cmd_pool_stats(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto data = ghr::read_dataset(cfg.dataset_dir);
  const auto& split = pick_split(data, o.split);
  ensure_dir(cfg.out_dir);
  auto rows = open_out(cfg.out_dir / "pool_stats.csv");
  rows.precision(17);
  rows << "graph_id,n_low,n_high,diam_low,diam_high,ratio\n";
  struct Bin {
    double low = 0, high = 0, ratio = 0;
    std::size_t count = 0;
  };
  std::map<std::size_t, Bin> bins;
  for (std::size_t i = 0; i < split.size(); ++i) {
    ghr::Rng rng = ghr::make_rng(cfg.train.seed, "hierarchy/" + o.split, i);
    const auto h = ghr::build_hierarchy(split[i].graph, cfg.model.pool_iterations, cfg.model.feature_reduce,
                                        cfg.model.edge_reduce, rng);
    const double dl = ghr::diameter(h.low).value_or(0);
    const double dh = ghr::diameter(h.high).value_or(0);
    const double ratio = dl > 0 ? dh / dl : 1.0;
    rows << i << ',' << h.low.num_nodes() << ',' << h.high.num_nodes() << ',' << dl << ',' << dh << ','
         << ratio << '\n';
    auto& b = bins[h.low.num_nodes() / o.bin_width * o.bin_width];
    b.low += dl;
    b.high += dh;
    b.ratio += ratio;
    ++b.count;
  }
  auto summary = open_out(cfg.out_dir / "pool_stats_binned.csv");
  summary.precision(17);
  summary << "n_bin_start,n_bin_end,count,mean_diam_low,mean_diam_high,mean_ratio\n";
  for (const auto& [start, b] : bins) {
    const double k = static_cast<double>(b.count);
    summary << start << ',' << start + o.bin_width - 1 << ',' << b.count << ',' << b.low / k << ','
            << b.high / k << ',' << b.ratio / k << '\n';
  }
  std::cout << "pool stats for " << split.size() << " graphs in " << cfg.out_dir.string() << '\n';
  return kOk;
}

int cmd_ablate(const Options& o) {
  const auto cfg = resolve_config(o);
  const auto data = ghr::read_dataset(cfg.dataset_dir);
  ensure_dir(cfg.out_dir);
  std::vector<ghr::AblationRow> rows;
  for (const auto seed : cfg.ablation_seeds) {
    for (const auto& variant : cfg.ablation_variants) {
      auto model = ghr::make_variant(cfg, variant, seed);
      model->apply_overrides(overrides(o));
      ghr::TrainConfig tc = cfg.train;
      tc.seed = seed;
      std::cerr << "[" << variant << " seed " << seed << "]\n";
      ghr::train(*model, data.train, data.val, tc, [](const ghr::EpochRecord& e) {
        std::cerr << "  epoch " << e.epoch << " loss " << e.train_loss << " val_mae " << e.val_mae << '\n';
      });
      const auto hs = ghr::prepare_hierarchies(*model, data.test, seed, "test", cfg.workers);
      const auto preds = ghr::predict(*model, data.test, hs, true, tc.eval_batch_size);
      auto report = ghr::id_oor_report(preds, data.test, cfg.train_cap());
      write_report(cfg.out_dir, "eval_" + variant + "_seed" + std::to_string(seed), report);
      rows.push_back({variant, seed, std::move(report)});
    }
  }
  {
    auto os = open_out(cfg.out_dir / "ablation_runs.csv");
    ghr::write_ablation_runs(os, rows);
  }
  auto os = open_out(cfg.out_dir / "ablation_summary.csv");
  ghr::write_ablation_summary(os, rows);
  ghr::write_ablation_summary(std::cout, rows);
  return kOk;
}

int cmd_selfcheck(const Options& o) {
  bool ok = true;
  for (const auto& c : ghr::run_self_checks(o.seed.value_or(0))) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    ok = ok && c.passed;
  }
  return ok ? kOk : kRuntime;
}

int exit_code(ghr::ErrorCode code) {
  switch (code) {
    case ghr::ErrorCode::kIo:
    case ghr::ErrorCode::kGenerationExhausted:
      return kRuntime;
    default:
      return kValidation;
  }
}

}  // namespace

int main(int argc, char** argv) {
  ghr::configure_allocator();
  CLI::App app{"Graph hierarchical recurrence: data generation, training and evaluation"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration");
    sub->add_option("--seed", o.seed, "Master seed (overrides data and train seeds)");
    sub->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--dataset", o.dataset, "Dataset directory");
  };
  const auto iterations = [&](CLI::App* sub) {
    sub->add_option("--t-low", o.t_low, "Low-level iterations at inference")->check(CLI::PositiveNumber);
    sub->add_option("--t-high", o.t_high, "High-level iterations at inference")->check(CLI::PositiveNumber);
    sub->add_option("--r", o.r, "Global recurrent steps at inference")->check(CLI::PositiveNumber);
  };

  auto* gen = app.add_subcommand("gen", "Generate train/val/test RGG shortest-path splits");
  common(gen);
  auto* train = app.add_subcommand("train", "Train one model variant");
  common(train);
  train->add_option("--variant", o.variant, "Model variant")
      ->check(CLI::IsMember(ghr::known_variants()));
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint with stratified MAE");
  common(eval);
  iterations(eval);
  eval->add_option("--checkpoint", o.checkpoint, "Checkpoint file (default <out>/checkpoint.bin)");
  eval->add_option("--split", o.split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_flag("--training-iterations", o.training_iterations,
                 "Use the training iteration counts instead of the inference ones");
  auto* pool = app.add_subcommand("pool-stats", "Diameters of input and pooled graphs");
  common(pool);
  pool->add_option("--split", o.split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  pool->add_option("--bin-width", o.bin_width, "Graph-size bin width")->check(CLI::PositiveNumber);
  auto* ablate = app.add_subcommand("ablate", "Train and evaluate every configured variant");
  common(ablate);
  iterations(ablate);
  auto* self = app.add_subcommand("selfcheck", "Gradient, pooling and permutation checks");
  self->add_option("--seed", o.seed, "Seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*gen) return cmd_gen(o);
    if (*train) return cmd_train(o);
    if (*eval) return cmd_eval(o);
    if (*pool) return cmd_pool_stats(o);
    if (*ablate) return cmd_ablate(o);
    if (*self) return cmd_selfcheck(o);
  } catch (const ghr::Error& e) {
    std::cerr << "error (" << ghr::to_string(e.code()) << "): " << e.what() << '\n';
    return exit_code(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kValidation;
}
