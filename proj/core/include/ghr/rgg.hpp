#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghr/graph.hpp"
#include "ghr/random.hpp"

namespace ghr {

enum class SourcePolicy { kResampleWithinCap, kMaxEccentricity };

std::string_view to_string(SourcePolicy p);

struct RGGConfig {
  // Train / validation graphs.
  std::size_t n_min = 40;
  std::size_t n_max = 60;
  double avg_degree = 12.0;
  std::optional<std::uint32_t> distance_cap = 5;
  // Test graphs (out-of-range protocol).
  std::size_t test_n_min = 40;
  std::size_t test_n_max = 60;
  std::uint32_t test_ceiling = 8;
  std::size_t train_size = 6000;
  std::size_t val_size = 1000;
  std::size_t test_size = 1000;
  std::uint64_t seed = 0;
  SourcePolicy source_policy = SourcePolicy::kResampleWithinCap;
  std::size_t source_tries = 20;
  std::size_t max_regenerations = 1000;

  void validate() const;
};

nlohmann::json to_json(const RGGConfig& c);
RGGConfig rgg_config_from_json(const nlohmann::json& j, RGGConfig base = {});

struct SSSPInstance {
  Graph graph;
  NodeId source = 0;
  DistanceVector labels;
  // True where the node takes part in loss and metrics.
  std::vector<bool> mask;
};

// Radius giving `avg_degree` expected neighbours in the unit square,
// ignoring boundary effects.
double connection_radius(std::size_t n, double avg_degree);

// n uniform in [n_min, n_max], positions uniform in the unit square, edges
// between points within the connection radius; returns the largest
// component. Node feature (source indicator) is 0 everywhere; edge feature 1.
Graph sample_rgg(std::size_t n_min, std::size_t n_max, double avg_degree, Rng& rng);

// Picks a source per policy and labels the graph; nullopt when the graph
// must be regenerated. `limit` is the cap (resample policy) or the test
// ceiling (max-eccentricity policy).
std::optional<SSSPInstance> make_instance(const Graph& g, Rng& rng, SourcePolicy policy,
                                          std::optional<std::uint32_t> limit,
                                          std::size_t source_tries = 20);

// Builds labels and mask for a fixed source.
SSSPInstance label_instance(const Graph& g, NodeId source, std::optional<std::uint32_t> limit);

// Samples graphs until make_instance succeeds; throws GenerationExhausted.
SSSPInstance generate_instance(std::size_t n_min, std::size_t n_max, double avg_degree, Rng& rng,
                               SourcePolicy policy, std::optional<std::uint32_t> limit,
                               std::size_t source_tries, std::size_t max_regenerations);

struct DatasetSplits {
  std::vector<SSSPInstance> train;
  std::vector<SSSPInstance> val;
  std::vector<SSSPInstance> test;
  nlohmann::json manifest;
};

// Train/val: resample-within-cap; test: max-eccentricity under the test
// ceiling. Instance i of split s draws from sub-stream ("data/<s>", i).
DatasetSplits build_splits(const RGGConfig& cfg, std::size_t workers = 1,
                           const std::string& protocol = "custom");

// Label histogram (finite labels only) of a split.
std::map<std::uint32_t, std::size_t> label_histogram(const std::vector<SSSPInstance>& split);

nlohmann::json instance_to_json(const SSSPInstance& inst);
SSSPInstance instance_from_json(const nlohmann::json& j);

void write_split(const std::filesystem::path& path, const std::vector<SSSPInstance>& split);
std::vector<SSSPInstance> read_split(const std::filesystem::path& path);

// Writes train.jsonl, val.jsonl, test.jsonl and manifest.json.
void write_dataset(const std::filesystem::path& dir, const DatasetSplits& splits);
DatasetSplits read_dataset(const std::filesystem::path& dir);

}  // namespace ghr
