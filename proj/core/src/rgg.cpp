#include "ghr/rgg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "ghr/error.hpp"
#include "ghr/graph_io.hpp"
#include "ghr/parallel.hpp"

namespace ghr {

using nlohmann::json;

std::string_view to_string(SourcePolicy p) {
  return p == SourcePolicy::kResampleWithinCap ? "resample_within_cap" : "max_eccentricity";
}

void RGGConfig::validate() const {
  require(n_min >= 1 && n_min <= n_max, ErrorCode::kInvalidConfig, "need 1 <= n_min <= n_max");
  require(test_n_min >= 1 && test_n_min <= test_n_max, ErrorCode::kInvalidConfig,
          "need 1 <= test_n_min <= test_n_max");
  require(avg_degree >= 1.0, ErrorCode::kInvalidConfig, "avg_degree must be >= 1");
  require(!distance_cap || *distance_cap >= 1, ErrorCode::kInvalidConfig, "distance_cap must be >= 1");
  require(source_tries >= 1 && max_regenerations >= 1, ErrorCode::kInvalidConfig,
          "retry limits must be >= 1");
}

json to_json(const RGGConfig& c) {
  json j;
  j["n_min"] = c.n_min;
  j["n_max"] = c.n_max;
  j["avg_degree"] = c.avg_degree;
  j["distance_cap"] = c.distance_cap ? json(*c.distance_cap) : json(nullptr);
  j["test_n_min"] = c.test_n_min;
  j["test_n_max"] = c.test_n_max;
  j["test_ceiling"] = c.test_ceiling;
  j["train_size"] = c.train_size;
  j["val_size"] = c.val_size;
  j["test_size"] = c.test_size;
  j["seed"] = c.seed;
  j["source_policy"] = std::string(to_string(c.source_policy));
  j["source_tries"] = c.source_tries;
  j["max_regenerations"] = c.max_regenerations;
  return j;
}

RGGConfig rgg_config_from_json(const json& j, RGGConfig c) {
  try {
    const auto size = [&](const char* key, std::size_t& out) {
      if (j.contains(key)) out = j.at(key).get<std::size_t>();
    };
    size("n_min", c.n_min);
    size("n_max", c.n_max);
    if (j.contains("avg_degree")) c.avg_degree = j.at("avg_degree").get<double>();
    if (j.contains("distance_cap")) {
      if (j.at("distance_cap").is_null())
        c.distance_cap.reset();
      else
        c.distance_cap = j.at("distance_cap").get<std::uint32_t>();
    }
    size("test_n_min", c.test_n_min);
    size("test_n_max", c.test_n_max);
    if (j.contains("test_ceiling")) c.test_ceiling = j.at("test_ceiling").get<std::uint32_t>();
    size("train_size", c.train_size);
    size("val_size", c.val_size);
    size("test_size", c.test_size);
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("source_policy")) {
      const auto p = j.at("source_policy").get<std::string>();
      require(p == "resample_within_cap" || p == "max_eccentricity", ErrorCode::kInvalidConfig,
              "unknown source_policy " + p);
      c.source_policy =
          p == "resample_within_cap" ? SourcePolicy::kResampleWithinCap : SourcePolicy::kMaxEccentricity;
    }
    size("source_tries", c.source_tries);
    size("max_regenerations", c.max_regenerations);
  } catch (const json::exception& e) {
    fail(ErrorCode::kInvalidConfig, e.what());
  }
  c.validate();
  return c;
}

double connection_radius(std::size_t n, double avg_degree) {
  if (n <= 1) return 0.0;
  return std::sqrt(avg_degree / (std::numbers::pi * static_cast<double>(n - 1)));
}

Graph sample_rgg(std::size_t n_min, std::size_t n_max, double avg_degree, Rng& rng) {
  const auto n = static_cast<std::size_t>(uniform_int(rng, n_min, n_max));
  Tensor pos(n, 2);
  for (std::size_t i = 0; i < n; ++i) {
    pos(i, 0) = uniform01(rng);
    pos(i, 1) = uniform01(rng);
  }
  const double r = connection_radius(n, avg_degree);
  const double r2 = r * r;
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i)
    for (NodeId j = i + 1; j < n; ++j) {
      const double dx = pos(i, 0) - pos(j, 0);
      const double dy = pos(i, 1) - pos(j, 1);
      if (dx * dx + dy * dy <= r2) edges.push_back({i, j});
    }
  const auto m = edges.size();
  Graph full = build_graph(n, std::move(edges), Tensor(n, 1), Tensor(m, 1, 1.0), std::move(pos));
  return largest_component(full).graph;
}

SSSPInstance label_instance(const Graph& g, NodeId source, std::optional<std::uint32_t> limit) {
  SSSPInstance inst;
  Tensor x(g.num_nodes(), 1);
  x(source, 0) = 1.0;
  inst.graph = g.with_node_features(std::move(x));
  inst.source = source;
  inst.labels = bfs_distances(g, source);
  inst.mask.resize(g.num_nodes());
  for (std::size_t v = 0; v < g.num_nodes(); ++v)
    inst.mask[v] = inst.labels[v].has_value() && (!limit || *inst.labels[v] <= *limit);
  return inst;
}

std::optional<SSSPInstance> make_instance(const Graph& g, Rng& rng, SourcePolicy policy,
                                          std::optional<std::uint32_t> limit,
                                          std::size_t source_tries) {
  require(g.num_nodes() >= 1, ErrorCode::kInvalidConfig, "cannot label an empty graph");
  if (policy == SourcePolicy::kResampleWithinCap) {
    for (std::size_t t = 0; t < source_tries; ++t) {
      const auto s = static_cast<NodeId>(uniform_int(rng, 0, g.num_nodes() - 1));
      if (!limit || eccentricity(g, s) <= *limit) return label_instance(g, s, limit);
    }
    return std::nullopt;
  }
  NodeId best = 0;
  std::uint32_t best_ecc = 0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    const auto e = eccentricity(g, s);
    if (e > best_ecc) {
      best_ecc = e;
      best = s;
    }
  }
  if (limit && best_ecc > *limit) return std::nullopt;
  return label_instance(g, best, limit);
}

SSSPInstance generate_instance(std::size_t n_min, std::size_t n_max, double avg_degree, Rng& rng,
                               SourcePolicy policy, std::optional<std::uint32_t> limit,
                               std::size_t source_tries, std::size_t max_regenerations) {
  for (std::size_t attempt = 0; attempt < max_regenerations; ++attempt) {
    const Graph g = sample_rgg(n_min, n_max, avg_degree, rng);
    if (auto inst = make_instance(g, rng, policy, limit, source_tries)) return std::move(*inst);
  }
  fail(ErrorCode::kGenerationExhausted,
       "no valid instance after " + std::to_string(max_regenerations) + " graph samples");
}

std::map<std::uint32_t, std::size_t> label_histogram(const std::vector<SSSPInstance>& split) {
  std::map<std::uint32_t, std::size_t> h;
  for (const auto& inst : split)
    for (const auto& d : inst.labels)
      if (d) ++h[*d];
  return h;
}

namespace {

json histogram_json(const std::map<std::uint32_t, std::size_t>& h) {
  json j = json::object();
  for (const auto& [d, c] : h) j[std::to_string(d)] = c;
  return j;
}

bool has_label_above(const SSSPInstance& inst, std::uint32_t cap) {
  return std::any_of(inst.labels.begin(), inst.labels.end(),
                     [&](const Distance& d) { return d && *d > cap; });
}

std::vector<SSSPInstance> generate_split(const RGGConfig& cfg, const std::string& name,
                                         std::size_t count, std::size_t n_min, std::size_t n_max,
                                         SourcePolicy policy, std::optional<std::uint32_t> limit,
                                         std::size_t workers) {
  std::vector<SSSPInstance> out(count);
  parallel_for(count, workers, [&](std::size_t i) {
    Rng rng = make_rng(cfg.seed, "data/" + name, i);
    out[i] = generate_instance(n_min, n_max, cfg.avg_degree, rng, policy, limit, cfg.source_tries,
                               cfg.max_regenerations);
  });
  return out;
}

}  // namespace

DatasetSplits build_splits(const RGGConfig& cfg, std::size_t workers, const std::string& protocol) {
  cfg.validate();
  DatasetSplits s;
  s.train = generate_split(cfg, "train", cfg.train_size, cfg.n_min, cfg.n_max, cfg.source_policy,
                           cfg.distance_cap, workers);
  s.val = generate_split(cfg, "val", cfg.val_size, cfg.n_min, cfg.n_max, cfg.source_policy,
                         cfg.distance_cap, workers);
  s.test = generate_split(cfg, "test", cfg.test_size, cfg.test_n_min, cfg.test_n_max,
                          SourcePolicy::kMaxEccentricity, cfg.test_ceiling, workers);

  // The test split must exercise the out-of-range regime; keep drawing
  // replacement graphs for the last slot until it does.
  if (cfg.distance_cap && !s.test.empty() &&
      std::none_of(s.test.begin(), s.test.end(),
                   [&](const SSSPInstance& inst) { return has_label_above(inst, *cfg.distance_cap); })) {
    Rng rng = make_rng(cfg.seed, "data/test-oor");
    bool found = false;
    for (std::size_t k = 0; k < cfg.max_regenerations && !found; ++k) {
      auto inst = generate_instance(cfg.test_n_min, cfg.test_n_max, cfg.avg_degree, rng,
                                    SourcePolicy::kMaxEccentricity, cfg.test_ceiling,
                                    cfg.source_tries, cfg.max_regenerations);
      if (has_label_above(inst, *cfg.distance_cap)) {
        s.test.back() = std::move(inst);
        found = true;
      }
    }
    require(found, ErrorCode::kGenerationExhausted, "no test graph reaches beyond the training cap");
  }

  json m;
  m["protocol"] = protocol;
  const std::string cap_text = cfg.distance_cap ? std::to_string(*cfg.distance_cap) : "none";
  m["description"] = "RGG single-source shortest paths: training distances capped at " + cap_text +
                     " hops; test distances up to " + std::to_string(cfg.test_ceiling) + " hops";
  m["config"] = to_json(cfg);
  m["seed"] = cfg.seed;
  m["connection_radius"] = "sqrt(avg_degree / (pi * (n - 1)))";
  m["disconnected_graphs"] = "largest connected component kept";
  m["splits"]["train"] = {{"count", s.train.size()},
                          {"source_policy", std::string(to_string(cfg.source_policy))},
                          {"histogram", histogram_json(label_histogram(s.train))}};
  m["splits"]["val"] = {{"count", s.val.size()},
                        {"source_policy", std::string(to_string(cfg.source_policy))},
                        {"histogram", histogram_json(label_histogram(s.val))}};
  m["splits"]["test"] = {
      {"count", s.test.size()},
      {"source_policy", "max_eccentricity (constructed rule: a source of maximum eccentricity, "
                        "graphs above the test ceiling rejected)"},
      {"histogram", histogram_json(label_histogram(s.test))}};
  s.manifest = std::move(m);
  return s;
}

json instance_to_json(const SSSPInstance& inst) {
  json j = graph_to_json(inst.graph);
  j["source"] = inst.source;
  json labels = json::array();
  for (const auto& d : inst.labels) labels.push_back(d ? json(*d) : json(nullptr));
  j["labels"] = std::move(labels);
  json mask = json::array();
  for (bool b : inst.mask) mask.push_back(b);
  j["mask"] = std::move(mask);
  return j;
}

SSSPInstance instance_from_json(const json& j) {
  SSSPInstance inst;
  inst.graph = graph_from_json(j);
  try {
    inst.source = j.at("source").get<NodeId>();
    for (const auto& d : j.at("labels"))
      inst.labels.push_back(d.is_null() ? Distance{} : Distance{d.get<std::uint32_t>()});
    for (const auto& b : j.at("mask")) inst.mask.push_back(b.get<bool>());
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, e.what());
  }
  require(inst.labels.size() == inst.graph.num_nodes() && inst.mask.size() == inst.graph.num_nodes(),
          ErrorCode::kShapeMismatch, "labels/mask length must equal num_nodes");
  require(inst.source < inst.graph.num_nodes(), ErrorCode::kIndexOutOfRange, "source out of range");
  return inst;
}

void write_split(const std::filesystem::path& path, const std::vector<SSSPInstance>& split) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  for (const auto& inst : split) os << instance_to_json(inst).dump() << '\n';
  require(static_cast<bool>(os), ErrorCode::kIo, "failed writing " + path.string());
}

std::vector<SSSPInstance> read_split(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  require(static_cast<bool>(is), ErrorCode::kIo, "cannot open " + path.string());
  std::vector<SSSPInstance> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorCode::kFormat, path.string() + ": " + e.what());
    }
    out.push_back(instance_from_json(j));
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const DatasetSplits& splits) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::kIo, "cannot create " + dir.string() + ": " + ec.message());
  write_split(dir / "train.jsonl", splits.train);
  write_split(dir / "val.jsonl", splits.val);
  write_split(dir / "test.jsonl", splits.test);
  std::ofstream os(dir / "manifest.json", std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(os), ErrorCode::kIo, "cannot write manifest.json");
  os << splits.manifest.dump(2) << '\n';
}

DatasetSplits read_dataset(const std::filesystem::path& dir) {
  DatasetSplits s;
  s.train = read_split(dir / "train.jsonl");
  s.val = read_split(dir / "val.jsonl");
  s.test = read_split(dir / "test.jsonl");
  std::ifstream is(dir / "manifest.json");
  if (is) {
    try {
      s.manifest = json::parse(is);
    } catch (const json::exception& e) {
      fail(ErrorCode::kFormat, std::string("manifest.json: ") + e.what());
    }
  }
  return s;
}

}  // namespace ghr
