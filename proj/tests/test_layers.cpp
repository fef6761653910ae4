#include <doctest.h>

#include <cmath>

#include "ghr/gradcheck.hpp"
#include "ghr/layers.hpp"
#include "support.hpp"

using namespace ghr;

namespace {

ParamStore layer_params(Backbone b, std::size_t m, std::uint64_t seed) {
  ParamStore ps;
  Rng rng = make_rng(seed, "layer");
  add_layer_params(ps, "L", b, m, rng);
  ps.at("L.eps").value(0, 0) = 0.3;
  ps.at("L.norm").value = oracle::random_tensor(1, m, seed + 9);
  return ps;
}

}  // namespace

TEST_SUITE("layers") {
  TEST_CASE("rms_norm examples") {
    Tape t;
    const Var ones = t.constant(Tensor::ones(1, 3));
    const Tensor c = t.value(t.rms_norm(t.constant(Tensor{{-2, -2, -2}}), ones));
    for (double v : c.values()) CHECK(v == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(t.value(t.rms_norm(t.constant(Tensor(1, 3)), ones)) == Tensor(1, 3));
    const Tensor y = t.value(t.rms_norm(t.constant(Tensor{{3, 4}}), t.constant(Tensor::ones(1, 2))));
    CHECK(y[0] == doctest::Approx(0.848528).epsilon(1e-6));
    CHECK(y[1] == doctest::Approx(1.131371).epsilon(1e-6));
    const Tensor x = oracle::random_tensor(5, 7, 1);
    const Tensor unit = t.value(t.rms_norm(t.constant(x), t.constant(Tensor::ones(1, 7))));
    for (std::size_t r = 0; r < 5; ++r) {
      double ms = 0;
      for (double v : unit.row_span(r)) ms += v * v;
      CHECK(std::sqrt(ms / 7) == doctest::Approx(1.0).epsilon(1e-6));
    }
    const Tensor w = oracle::random_tensor(1, 7, 2);
    CHECK(max_abs_diff(t.value(t.rms_norm(t.constant(x), t.constant(w))), oracle::rms_norm(x, w)) <= 1e-12);
  }

  TEST_CASE("swiglu examples") {
    Tape t;
    const Var one = t.constant(Tensor{{1}});
    CHECK(t.value(swiglu(t, t.constant(Tensor{{2}}), one, one, one))[0] ==
          doctest::Approx(3.523188).epsilon(1e-6));
    const Tensor x = oracle::random_tensor(4, 3, 5);
    const Var zero = t.constant(Tensor(3, 3));
    const Var r = t.constant(oracle::random_tensor(3, 3, 6));
    CHECK(t.value(swiglu(t, t.constant(x), r, zero, r)) == Tensor(4, 3));
    CHECK(t.value(swiglu(t, t.constant(Tensor(4, 3)), r, r, r)) == Tensor(4, 3));
    const Tensor wc = oracle::random_tensor(3, 3, 7), wg = oracle::random_tensor(3, 3, 8),
                 wo = oracle::random_tensor(3, 3, 9);
    const Tensor got = t.value(swiglu(t, t.constant(x), t.constant(wc), t.constant(wg), t.constant(wo)));
    CHECK(max_abs_diff(got, oracle::swiglu(x, wc, wg, wo)) <= 1e-12);
  }

  TEST_CASE("gine aggregation") {
    SUBCASE("isolated node") {
      const Graph g = fixture::make(1, {});
      Tape t;
      const Var agg = gine_aggregate(t, t.constant(Tensor{{2, -3}}), ArcView::of(g), t.constant(Tensor(0, 2)),
                                     t.constant(Tensor{{0.5}}));
      CHECK(t.value(agg) == Tensor{{3, -4.5}});
    }
    SUBCASE("star with negative leaves") {
      const Graph star = fixture::make(4, {{0, 1}, {0, 2}, {0, 3}});
      Tensor h(4, 1, -1.0);
      h(0, 0) = 0.7;
      Tape t;
      const Var agg = gine_aggregate(t, t.constant(h), ArcView::of(star), t.constant(Tensor(6, 1)),
                                     t.constant(Tensor{{0}}));
      CHECK(t.value(agg)(0, 0) == doctest::Approx(0.7));
    }
    SUBCASE("random graphs against the loop oracle") {
      for (std::uint64_t s = 0; s < 10; ++s) {
        const Graph g = fixture::random_graph(10, 0.3, s);
        const Tensor h = oracle::random_tensor(10, 4, s + 1);
        const Tensor e = oracle::random_tensor(g.num_arcs(), 4, s + 2);
        Tape t;
        const Var agg =
            gine_aggregate(t, t.constant(h), ArcView::of(g), t.constant(e), t.constant(Tensor{{0.25}}));
        CHECK(max_abs_diff(t.value(agg), oracle::aggregate(h, g, e, 0.25)) <= 1e-12);
      }
    }
  }

  TEST_CASE("zero update weights give the residual identity") {
    const Graph g = fixture::random_graph(8, 0.4, 3);
    const Tensor h = oracle::random_tensor(8, 4, 4);
    for (Backbone b : {Backbone::kGatedGine, Backbone::kGine}) {
      ParamStore ps = layer_params(b, 4, 1);
      for (const char* name : {"L.content", "L.gate", "L.out", "L.mlp1", "L.mlp2"})
        if (ps.contains(name)) ps.at(name).value.fill(0.0);
      Tape t;
      const LayerVars lv = bind_layer(t, ps, "L", b);
      const Var e = t.constant(oracle::random_tensor(g.num_arcs(), 4, 5));
      const Var out = b == Backbone::kGatedGine ? gated_gine_step(t, lv, t.constant(h), ArcView::of(g), e)
                                                : gine_step(t, lv, t.constant(h), ArcView::of(g), e);
      CHECK(t.value(out) == h);
    }
  }

  TEST_CASE("gated step on a single node composes norm and SwiGLU") {
    ParamStore ps = layer_params(Backbone::kGatedGine, 3, 2);
    ps.at("L.eps").value(0, 0) = 0.0;
    const Tensor h = oracle::random_tensor(1, 3, 10);
    Tape t;
    const LayerVars lv = bind_layer(t, ps, "L", Backbone::kGatedGine);
    const Var out =
        gated_gine_step(t, lv, t.constant(h), ArcView::of(fixture::make(1, {})), t.constant(Tensor(0, 3)));
    const Tensor u = oracle::swiglu(oracle::rms_norm(h, ps.at("L.norm").value), ps.at("L.content").value,
                                   ps.at("L.gate").value, ps.at("L.out").value);
    Tensor expect = h;
    for (std::size_t k = 0; k < 3; ++k) expect[k] += u[k];
    CHECK(max_abs_diff(t.value(out), expect) <= 1e-12);
  }

  TEST_CASE("plain GINE hand case and loop oracle") {
    SUBCASE("m = 1, unit weights") {
      ParamStore ps;
      ps.add("L.norm", Tensor{{1}});
      ps.add("L.eps", Tensor{{0}});
      ps.add("L.mlp1", Tensor{{1}});
      ps.add("L.mlp2", Tensor{{1}});
      const Graph g = fixture::path(2);
      const Tensor h{{2}, {-3}};
      Tape t;
      const LayerVars lv = bind_layer(t, ps, "L", Backbone::kGine);
      const Tensor out = t.value(gine_step(t, lv, t.constant(h), ArcView::of(g), t.constant(Tensor(2, 1))));
      // norm: (1, -1) (up to the 1e-8 floor); aggregate: 1 + relu(-1) = 1, -1 + relu(1) = 0.
      CHECK(out(0, 0) == doctest::Approx(2 + 1).epsilon(1e-7));
      CHECK(out(1, 0) == doctest::Approx(-3 + 0).epsilon(1e-7));
    }
    SUBCASE("random graph") {
      ParamStore ps = layer_params(Backbone::kGine, 4, 3);
      const Graph g = fixture::random_graph(9, 0.35, 11);
      const Tensor h = oracle::random_tensor(9, 4, 12);
      const Tensor e = oracle::random_tensor(g.num_arcs(), 4, 13);
      Tape t;
      const LayerVars lv = bind_layer(t, ps, "L", Backbone::kGine);
      const Tensor got = t.value(gine_step(t, lv, t.constant(h), ArcView::of(g), t.constant(e)));
      Tensor a = oracle::aggregate(oracle::rms_norm(h, ps.at("L.norm").value), g, e, 0.3);
      Tensor z = oracle::loop_matmul(a, ps.at("L.mlp1").value);
      for (auto& v : z.values()) v = std::max(0.0, v);
      z = oracle::loop_matmul(z, ps.at("L.mlp2").value);
      for (auto& v : z.values()) v = std::max(0.0, v);
      for (std::size_t k = 0; k < z.size(); ++k) z[k] += h[k];
      CHECK(max_abs_diff(got, z) <= 1e-12);
    }
  }

  TEST_CASE("layers are permutation equivariant") {
    for (Backbone b : {Backbone::kGatedGine, Backbone::kGine}) {
      ParamStore ps = layer_params(b, 5, 4);
      const std::size_t n = 12;
      const auto edges = oracle::random_edges(n, 0.3, 20);
      const std::vector<NodeId> perm{4, 7, 0, 11, 2, 9, 1, 5, 10, 3, 8, 6};
      std::vector<Edge> pedges;
      for (auto it = edges.rbegin(); it != edges.rend(); ++it) pedges.emplace_back(perm[it->second], perm[it->first]);
      const Graph g = fixture::make(n, edges), gp = fixture::make(n, pedges);
      const Tensor h = oracle::random_tensor(n, 5, 21);
      const Tensor e = oracle::random_tensor(edges.size(), 5, 22);
      Tensor hp(n, 5), ep(edges.size(), 5);
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t c = 0; c < 5; ++c) hp(perm[v], c) = h(v, c);
      for (std::size_t k = 0; k < edges.size(); ++k)
        for (std::size_t c = 0; c < 5; ++c) ep(edges.size() - 1 - k, c) = e(k, c);
      const auto run = [&](const Graph& gr, const Tensor& x, const Tensor& ef) {
        Tape t;
        const LayerVars lv = bind_layer(t, ps, "L", b);
        const ArcView av = ArcView::of(gr);
        const Var earc = t.gather_rows(t.constant(ef), av.edge);
        const Var out = b == Backbone::kGatedGine ? gated_gine_step(t, lv, t.constant(x), av, earc)
                                                  : gine_step(t, lv, t.constant(x), av, earc);
        return t.value(out);
      };
      const Tensor y = run(g, h, e), yp = run(gp, hp, ep);
      double worst = 0;
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t c = 0; c < 5; ++c) worst = std::max(worst, std::abs(y(v, c) - yp(perm[v], c)));
      CHECK(worst <= 1e-9);
    }
  }

  TEST_CASE("layer gradients pass the finite-difference check") {
    for (Backbone b : {Backbone::kGatedGine, Backbone::kGine}) {
      ParamStore ps = layer_params(b, 4, 5);
      ps.add("h", oracle::random_tensor(7, 4, 30));
      const Graph g = fixture::random_graph(7, 0.4, 31);
      const Tensor e = oracle::random_tensor(g.num_arcs(), 4, 32);
      const Tensor probe = oracle::random_tensor(7, 4, 33);
      const auto r = finite_difference_check(
          [&](Tape& t, const ParamStore& p) {
            const LayerVars lv = bind_layer(t, p, "L", b);
            const Var h = t.param(p, "h");
            const Var out = b == Backbone::kGatedGine ? gated_gine_step(t, lv, h, ArcView::of(g), t.constant(e))
                                                      : gine_step(t, lv, h, ArcView::of(g), t.constant(e));
            return t.sum_all(t.hadamard(out, t.constant(probe)));
          },
          ps, 1e-5);
      INFO(to_string(b) << " worst " << r.worst_parameter);
      CHECK(r.max_relative_error <= 1e-6);
    }
  }
}
