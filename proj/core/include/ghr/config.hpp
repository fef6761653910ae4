#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghr/baselines.hpp"
#include "ghr/model.hpp"
#include "ghr/rgg.hpp"
#include "ghr/training.hpp"

namespace ghr {

// Settings for the flat baselines trained next to GHR.
struct BaselineSettings {
  std::size_t deep_depth = 10;
  std::size_t recurrent_depth = 10;
  std::optional<std::size_t> recurrent_infer_depth;
  // "+GR" variants: R global steps of `gr_iterations` layer applications.
  std::size_t gr_steps = 4;
  std::size_t gr_iterations = 12;
};

struct RunConfig {
  std::string preset = "small_oor";
  RGGConfig data;
  GHRConfig model;
  TrainConfig train;
  BaselineSettings baselines;
  std::vector<std::string> ablation_variants;
  std::vector<std::uint64_t> ablation_seeds{0};
  std::filesystem::path dataset_dir = "data";
  std::filesystem::path out_dir = "runs";
  std::size_t workers = 1;

  void validate() const;
  // Label cap seen in training; used to split ID and OOR metrics.
  std::uint32_t train_cap() const;
};

// Known presets: "small_oor", "large_oor".
RunConfig preset_config(const std::string& name);

// Expands "preset" first, then applies the sections "data", "model",
// "train", "baselines", "ablation" and "paths" as overrides.
RunConfig run_config_from_json(const nlohmann::json& j);
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& c);

const std::vector<std::string>& known_variants();

// Fresh model for an ablation variant name; throws InvalidConfig otherwise.
std::unique_ptr<Model> make_variant(const RunConfig& cfg, const std::string& variant,
                                    std::uint64_t seed);

}  // namespace ghr
