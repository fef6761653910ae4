#include <doctest.h>

#include <functional>
#include <set>

#include "ghr/error.hpp"
#include "ghr/hierarchy.hpp"
#include "ghr/rgg.hpp"
#include "support.hpp"

using namespace ghr;

namespace {

ClusterAssignment assignment(std::vector<std::uint32_t> c, std::size_t k) {
  ClusterAssignment a;
  a.cluster_of = std::move(c);
  a.num_clusters = k;
  return a;
}

// All maximal matchings of the 4-cycle 0-1-2-3-0 as sets of pairs.
std::set<std::set<std::pair<NodeId, NodeId>>> c4_maximal_matchings() {
  const std::vector<Edge> edges{{0, 1}, {1, 2}, {2, 3}, {0, 3}};
  std::set<std::set<std::pair<NodeId, NodeId>>> out;
  for (unsigned mask = 0; mask < 16; ++mask) {
    std::set<std::pair<NodeId, NodeId>> chosen;
    std::vector<int> used(4, 0);
    bool ok = true;
    for (unsigned k = 0; k < 4; ++k) {
      if (!(mask >> k & 1u)) continue;
      auto [a, b] = edges[k];
      if (used[a] || used[b]) ok = false;
      used[a] = used[b] = 1;
      chosen.insert({a, b});
    }
    if (!ok) continue;
    bool maximal = true;
    for (auto [a, b] : edges)
      if (!used[a] && !used[b]) maximal = false;
    if (maximal) out.insert(chosen);
  }
  return out;
}

}  // namespace

TEST_SUITE("hierarchy") {
  TEST_CASE("graclus on trivial graphs") {
    Rng rng = make_rng(1, "t");
    const auto iso = graclus_match(fixture::make(3, {}), rng);
    CHECK(iso.num_clusters == 3);
    const auto pair = graclus_match(fixture::path(2), rng);
    CHECK(pair.num_clusters == 1);
    CHECK(pair.cluster_of == std::vector<std::uint32_t>{0, 0});
  }

  TEST_CASE("graclus on C4 always yields an enumerated maximal matching") {
    const auto valid = c4_maximal_matchings();
    CHECK(valid.size() == 2);
    const Graph c4 = fixture::make(4, {{0, 1}, {1, 2}, {2, 3}, {0, 3}});
    for (std::uint64_t s = 0; s < 64; ++s) {
      Rng rng = make_rng(s, "c4");
      const auto a = graclus_match(c4, rng);
      a.validate();
      CHECK(a.num_clusters == 2);
      std::set<std::pair<NodeId, NodeId>> pairs;
      for (const auto& m : a.members()) {
        REQUIRE(m.size() == 2);
        pairs.insert({m[0], m[1]});
      }
      CHECK(valid.count(pairs) == 1);
    }
  }

  TEST_CASE("graclus clusters have size <= 2, pairs are adjacent, and seeds repeat") {
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Graph g = fixture::random_graph(40, 0.1, s);
      Rng r1 = make_rng(s, "g"), r2 = make_rng(s, "g");
      const auto a = graclus_match(g, r1);
      CHECK(a.cluster_of == graclus_match(g, r2).cluster_of);
      a.validate();
      for (const auto& m : a.members()) {
        CHECK(m.size() <= 2);
        if (m.size() == 2) CHECK(g.has_edge(m[0], m[1]));
      }
      // Maximality: no edge joins two singletons.
      std::vector<std::size_t> sz(a.num_clusters, 0);
      for (auto c : a.cluster_of) ++sz[c];
      for (auto [u, v] : g.edges()) CHECK_FALSE((sz[a.cluster_of[u]] == 1 && sz[a.cluster_of[v]] == 1));
    }
  }

  TEST_CASE("graclus prefers the minimum-degree neighbour, then the smallest index") {
    // Star centre 0 with leaves 1..3, leaf 3 also tied to 4 (degree 2). Visiting
    // 0 first must pick leaf 1 (degree 1, smallest index).
    const Graph g = fixture::make(5, {{0, 1}, {0, 2}, {0, 3}, {3, 4}});
    for (std::uint64_t s = 0; s < 200; ++s) {
      Rng probe = make_rng(s, "order");
      const auto order = random_permutation(probe, 5);
      if (order[0] != 0) continue;
      Rng rng = make_rng(s, "order");
      const auto a = graclus_match(g, rng);
      CHECK(a.cluster_of[0] == a.cluster_of[1]);
      return;
    }
    FAIL("no seed visits node 0 first");
  }

  TEST_CASE("quotient graph examples") {
    SUBCASE("identity assignment reproduces the graph") {
      const Graph g = fixture::random_graph(12, 0.3, 4);
      const Graph q = quotient_graph(g, ClusterAssignment::identity(12), Reduce::kSum);
      std::set<Edge> a(g.edges().begin(), g.edges().end()), b(q.edges().begin(), q.edges().end());
      CHECK(a == b);
      CHECK(q.num_nodes() == 12);
    }
    SUBCASE("path with clusters {0,1},{2,3}") {
      const Graph q = quotient_graph(fixture::path(4), assignment({0, 0, 1, 1}, 2), Reduce::kSum);
      CHECK(q.edges() == std::vector<Edge>{{0, 1}});
      CHECK(q.edge_features()(0, 0) == 1.0);
    }
    SUBCASE("triangle edge features reduce over cross-cluster edges") {
      const Graph tri = build_graph(3, {{0, 1}, {0, 2}, {1, 2}}, Tensor(3, 1), Tensor{{1}, {2}, {3}});
      const auto a = assignment({0, 0, 1}, 2);
      CHECK(quotient_graph(tri, a, Reduce::kSum).edge_features()(0, 0) == 5.0);
      CHECK(quotient_graph(tri, a, Reduce::kMean).edge_features()(0, 0) == 2.5);
      CHECK(quotient_graph(tri, a, Reduce::kMax).edge_features()(0, 0) == 3.0);
    }
    SUBCASE("invalid assignment") {
      CHECK_THROWS_AS(quotient_graph(fixture::path(3), assignment({0, 2, 2}, 3), Reduce::kSum), Error);
      CHECK_THROWS_AS(quotient_graph(fixture::path(3), assignment({0, 1}, 2), Reduce::kSum), Error);
    }
  }

  TEST_CASE("quotient edges are exactly the distinct cross-cluster images") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      Rng rng = make_rng(s, "quot");
      const Graph g = sample_rgg(100, 200, 8.0, rng);
      const Hierarchy h = build_hierarchy(g, 3, Reduce::kMax, Reduce::kSum, rng);
      std::set<Edge> expected;
      for (auto [u, v] : g.edges()) {
        auto a = h.assignment.cluster_of[u], b = h.assignment.cluster_of[v];
        if (a != b) expected.insert({std::min(a, b), std::max(a, b)});
      }
      CHECK(std::set<Edge>(h.high.edges().begin(), h.high.edges().end()) == expected);
      CHECK(h.high.num_edges() == expected.size());
    }
  }

  TEST_CASE("pool and unpool") {
    const Tensor x{{1, 2}, {3, 4}};
    const auto pair = assignment({0, 0}, 1);
    CHECK(pool_features(x, pair, Reduce::kSum) == Tensor{{4, 6}});
    CHECK(pool_features(x, pair, Reduce::kMean) == Tensor{{2, 3}});
    CHECK(pool_features(x, pair, Reduce::kMax) == Tensor{{3, 4}});
    for (auto r : {Reduce::kSum, Reduce::kMean, Reduce::kMax})
      CHECK(pool_features(x, ClusterAssignment::identity(2), r) == x);
    CHECK(unpool_features(Tensor{{7}}, assignment({0, 0, 0}, 1)) == Tensor{{7}, {7}, {7}});
    CHECK(unpool_features(x, ClusterAssignment::identity(2)) == x);
    CHECK_THROWS_AS(pool_features(x, assignment({0, 0, 0}, 1), Reduce::kSum), Error);
    CHECK_THROWS_AS(unpool_features(x, assignment({0, 0, 0}, 1)), Error);
  }

  TEST_CASE("max pooling agrees with a per-element loop; sum conserves mass") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      const Graph g = fixture::random_graph(30, 0.15, 50 + s);
      Rng rng = make_rng(s, "pool");
      const auto a = graclus_match(g, rng);
      const Tensor x = oracle::random_tensor(30, 4, s);
      const Tensor mx = pool_features(x, a, Reduce::kMax);
      Tensor expect(a.num_clusters, 4, -1e300);
      for (std::size_t u = 0; u < 30; ++u)
        for (std::size_t c = 0; c < 4; ++c)
          expect(a.cluster_of[u], c) = std::max(expect(a.cluster_of[u], c), x(u, c));
      CHECK(mx == expect);
      const Tensor sm = pool_features(x, a, Reduce::kSum);
      for (std::size_t c = 0; c < 4; ++c) {
        double in = 0, out = 0;
        for (std::size_t u = 0; u < 30; ++u) in += x(u, c);
        for (std::size_t k = 0; k < a.num_clusters; ++k) out += sm(k, c);
        CHECK(out == doctest::Approx(in).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("mean pool then unpool is a fixed point on cluster-constant input") {
    const auto a = assignment({0, 1, 0, 2, 1}, 3);
    const Tensor xh{{1.5, -2}, {0.25, 4}, {9, 9}};
    const Tensor x = unpool_features(xh, a);
    CHECK(unpool_features(pool_features(x, a, Reduce::kMean), a) == x);
  }

  TEST_CASE("build_hierarchy examples") {
    Rng rng = make_rng(0, "bh");
    const Hierarchy one = build_hierarchy(fixture::path(2), 1, Reduce::kMax, Reduce::kSum, rng);
    CHECK(one.high.num_nodes() == 1);
    CHECK(one.high.num_edges() == 0);
    const Hierarchy p64 = build_hierarchy(fixture::path(64), 3, Reduce::kMax, Reduce::kSum, rng);
    CHECK(p64.high.num_nodes() >= 8);
    CHECK(p64.node_ratio() < 1.0);
    CHECK_THROWS_AS(build_hierarchy(fixture::path(4), 0, Reduce::kMax, Reduce::kSum, rng), Error);
  }

  TEST_CASE("Lipschitz distances and diameter on seeded RGGs of 100 nodes") {
    for (std::uint64_t s = 0; s < 15; ++s) {
      Rng rng = make_rng(s, "lip");
      const Graph g = sample_rgg(100, 100, 10.0, rng);
      const Hierarchy h = build_hierarchy(g, 3, Reduce::kMax, Reduce::kSum, rng);
      const auto dl = oracle::floyd_warshall(h.low.num_nodes(), h.low.edges());
      const auto dh = oracle::floyd_warshall(h.high.num_nodes(), h.high.edges());
      const auto& c = h.assignment.cluster_of;
      std::size_t bad = 0;
      for (std::size_t u = 0; u < dl.size(); ++u)
        for (std::size_t v = 0; v < dl.size(); ++v)
          if (dl[u][v] < oracle::kInf && dh[c[u]][c[v]] > dl[u][v]) ++bad;
      CHECK(bad == 0);
      CHECK(*diameter(h.high) <= *diameter(h.low));
    }
  }

  TEST_CASE("geometric block pooling") {
    const auto bp = geometric_block_assignment(4, 2);
    CHECK(bp.assignment.num_clusters == 4);
    for (const auto& m : bp.assignment.members()) CHECK(m.size() == 4);
    // Node (x=3, y=1) -> id 7 -> block (1, 0) -> cluster 1.
    CHECK(bp.assignment.cluster_of[7] == 1);
    CHECK(block_center_distance(2, 2, 0, 1) == doctest::Approx(2.0));
    CHECK(block_center_distance(2, 2, 0, 3) == doctest::Approx(2.0 * std::sqrt(2.0)));
    CHECK(bp.high_edges.size() == 4);
    for (std::size_t k = 0; k < bp.high_edges.size(); ++k) CHECK(bp.high_edge_features(k, 0) == 2.0);
    try {
      geometric_block_assignment(6, 4);
      FAIL("expected NonDivisibleBlock");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kNonDivisibleBlock);
    }
  }
}
