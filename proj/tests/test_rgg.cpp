#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ghr/error.hpp"
#include "ghr/rgg.hpp"
#include "support.hpp"

using namespace ghr;

namespace {

RGGConfig tiny_config() {
  RGGConfig c;
  c.train_size = 10;
  c.val_size = 5;
  c.test_size = 5;
  c.seed = 42;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("rgg") {
  TEST_CASE("sample_rgg degenerate and deterministic cases") {
    Rng rng = make_rng(0, "t");
    const Graph one = sample_rgg(1, 1, 12.0, rng);
    CHECK(one.num_nodes() == 1);
    CHECK(one.num_edges() == 0);
    Rng a = make_rng(5, "t"), b = make_rng(5, "t");
    const Graph ga = sample_rgg(40, 60, 12.0, a), gb = sample_rgg(40, 60, 12.0, b);
    CHECK(ga.edges() == gb.edges());
    CHECK(*ga.positions() == *gb.positions());
  }

  TEST_CASE("edges are exactly the pairs within the connection radius") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      Rng rng = make_rng(s, "radius");
      const Graph g = sample_rgg(50, 50, 12.0, rng);
      const Tensor& pos = *g.positions();
      // The kept component may be smaller than the sampled n; the radius is
      // fixed by the sampled size, so recover it from the edge set bounds.
      const double r = connection_radius(50, 12.0);
      for (NodeId i = 0; i < g.num_nodes(); ++i)
        for (NodeId j = i + 1; j < g.num_nodes(); ++j) {
          const double d = std::hypot(pos(i, 0) - pos(j, 0), pos(i, 1) - pos(j, 1));
          CHECK(g.has_edge(i, j) == (d <= r));
        }
      CHECK(connected_components(g).size() == g.num_nodes());
      std::size_t count = 0;
      connected_components(g, &count);
      CHECK(count == 1);
      for (std::size_t k = 0; k < g.num_edges(); ++k) CHECK(g.edge_features()(k, 0) == 1.0);
    }
  }

  TEST_CASE("mean degree at n = 300 lies in [9, 15]") {
    double total = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
      Rng rng = make_rng(s, "degree");
      const Graph g = sample_rgg(300, 300, 12.0, rng);
      total += 2.0 * static_cast<double>(g.num_edges()) / static_cast<double>(g.num_nodes());
    }
    const double mean = total / 200.0;
    CHECK(mean >= 9.0);
    CHECK(mean <= 15.0);
  }

  TEST_CASE("make_instance examples") {
    SUBCASE("path with a generous cap, source at an end") {
      const auto inst = label_instance(fixture::path(5), 0, 10);
      for (std::uint32_t v = 0; v < 5; ++v) CHECK(inst.labels[v] == v);
      for (bool m : inst.mask) CHECK(m);
      CHECK(inst.graph.node_features()(0, 0) == 1.0);
      CHECK(inst.graph.node_features()(3, 0) == 0.0);
    }
    SUBCASE("cap 2 on a 5-path admits only the middle source") {
      for (std::uint64_t s = 0; s < 20; ++s) {
        Rng rng = make_rng(s, "mid");
        const auto inst = make_instance(fixture::path(5), rng, SourcePolicy::kResampleWithinCap, 2, 200);
        REQUIRE(inst.has_value());
        CHECK(inst->source == 2);
      }
    }
    SUBCASE("max eccentricity picks an end of a path and respects the ceiling") {
      Rng rng = make_rng(0, "ecc");
      const auto inst = make_instance(fixture::path(6), rng, SourcePolicy::kMaxEccentricity, 8);
      REQUIRE(inst.has_value());
      CHECK(inst->source == 0);
      CHECK_FALSE(make_instance(fixture::path(12), rng, SourcePolicy::kMaxEccentricity, 8).has_value());
    }
    SUBCASE("labels beyond the cap are masked out") {
      const auto inst = label_instance(fixture::path(6), 0, 3);
      for (std::size_t v = 0; v < 6; ++v) CHECK(inst.mask[v] == (v <= 3));
    }
  }

  TEST_CASE("generation gives up with GenerationExhausted") {
    Rng rng = make_rng(0, "x");
    try {
      // A 30-node path-like RGG never has eccentricity <= 0.
      generate_instance(30, 30, 12.0, rng, SourcePolicy::kResampleWithinCap, 0, 3, 5);
      FAIL("expected GenerationExhausted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kGenerationExhausted);
    }
  }

  TEST_CASE("splits: sizes, caps, determinism and OOR coverage") {
    const RGGConfig cfg = tiny_config();
    const auto a = build_splits(cfg, 1, "small_oor");
    const auto b = build_splits(cfg, 3, "small_oor");
    CHECK(a.train.size() == 10);
    CHECK(a.val.size() == 5);
    CHECK(a.test.size() == 5);
    for (const auto* split : {&a.train, &a.val})
      for (const auto& inst : *split)
        for (const auto& d : inst.labels) CHECK(d.value() <= 5u);
    bool oor = false;
    for (const auto& inst : a.test)
      for (const auto& d : inst.labels) {
        CHECK(d.value() <= 8u);
        oor = oor || *d >= 6;
      }
    CHECK(oor);
    // Worker count does not change the data.
    for (std::size_t i = 0; i < a.train.size(); ++i) {
      CHECK(a.train[i].graph.edges() == b.train[i].graph.edges());
      CHECK(a.train[i].labels == b.train[i].labels);
    }
    CHECK(a.manifest == b.manifest);
    CHECK(a.manifest.at("description").get<std::string>().find("capped at 5") != std::string::npos);
  }

  TEST_CASE("labels match Floyd-Warshall and the mask rule on generated data") {
    RGGConfig cfg = tiny_config();
    cfg.train_size = 30;
    cfg.val_size = 10;
    cfg.test_size = 10;
    const auto d = build_splits(cfg);
    for (const auto* split : {&d.train, &d.val, &d.test}) {
      const std::uint32_t cap = split == &d.test ? cfg.test_ceiling : *cfg.distance_cap;
      for (const auto& inst : *split) {
        const auto fw = oracle::floyd_warshall(inst.graph.num_nodes(), inst.graph.edges());
        for (std::size_t v = 0; v < inst.labels.size(); ++v) {
          REQUIRE(inst.labels[v].has_value());
          CHECK(*inst.labels[v] == fw[inst.source][v]);
          CHECK(inst.mask[v] == (*inst.labels[v] <= cap));
        }
      }
    }
  }

  TEST_CASE("dataset files round trip and are byte-stable") {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "ghr_test_rgg_roundtrip";
    fs::remove_all(dir);
    const auto d = build_splits(tiny_config());
    write_dataset(dir, d);
    const std::string first = slurp(dir / "train.jsonl") + slurp(dir / "manifest.json");
    const auto back = read_dataset(dir);
    REQUIRE(back.test.size() == d.test.size());
    for (std::size_t i = 0; i < d.test.size(); ++i) {
      CHECK(back.test[i].labels == d.test[i].labels);
      CHECK(back.test[i].mask == d.test[i].mask);
      CHECK(back.test[i].source == d.test[i].source);
      CHECK(*back.test[i].graph.positions() == *d.test[i].graph.positions());
    }
    write_dataset(dir, back);
    CHECK(slurp(dir / "train.jsonl") + slurp(dir / "manifest.json") == first);
    fs::remove_all(dir);
  }

  TEST_CASE("unreachable labels serialize as null") {
    const auto inst = label_instance(fixture::make(3, {{0, 1}}), 0, 5);
    const auto j = instance_to_json(inst);
    CHECK(j.at("labels")[2].is_null());
    const auto back = instance_from_json(j);
    CHECK_FALSE(back.labels[2].has_value());
    CHECK_FALSE(back.mask[2]);
  }
}
