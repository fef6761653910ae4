#include <doctest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "ghr/baselines.hpp"
#include "ghr/checks.hpp"
#include "ghr/eval.hpp"
#include "ghr/gradcheck.hpp"
#include "ghr/rgg.hpp"
#include "ghr/training.hpp"
#include "support.hpp"

using namespace ghr;

namespace {

SSSPInstance with_labels(std::vector<std::optional<std::uint32_t>> labels, std::vector<bool> mask) {
  SSSPInstance inst;
  inst.graph = fixture::make(labels.size(), {});
  inst.labels = std::move(labels);
  inst.mask = std::move(mask);
  return inst;
}

FlatConfig flat(FlatKind kind, Backbone b, std::size_t depth) {
  FlatConfig c;
  c.kind = kind;
  c.backbone = b;
  c.hidden = 5;
  c.depth = depth;
  return c;
}

Graph sample_graph(std::uint64_t seed) {
  Rng rng = make_rng(seed, "test/flat");
  return generate_instance(12, 25, 8.0, rng, SourcePolicy::kResampleWithinCap, 5, 20, 1000).graph;
}

// One flat iteration: h + MP(f + RMSNorm_k(h)).
Tensor flat_iteration(const ParamStore& ps, std::size_t k, const Graph& g, const Tensor& h) {
  const std::string pre = "layer" + std::to_string(k);
  const Tensor f = oracle::loop_matmul(g.node_features(), ps.at("enc.node").value);
  const Tensor e = oracle::arc_rows(oracle::loop_matmul(g.edge_features(), ps.at("enc.edge_low").value));
  const Tensor in = oracle::plus(f, oracle::rms_norm(h, ps.at(pre + ".state_norm").value));
  return oracle::plus(h, oracle::mp_update(ps, pre, in, g, e));
}

Tensor initial(const ParamStore& ps, std::size_t n) {
  Tensor h(n, ps.at("z.low").value.cols());
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t c = 0; c < h.cols(); ++c) h(v, c) = ps.at("z.low").value(0, c);
  return h;
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("stratified MAE examples") {
    const DistanceVector labels{0u, 3u, 3u, 5u};
    const std::vector<bool> mask{true, true, true, false};
    const std::vector<double> perfect{0, 3, 3, 7};
    for (const auto& [d, e] : stratified_mae(perfect, labels, mask)) CHECK(e.mae == 0.0);
    const auto m = stratified_mae(std::vector<double>{0, 4, 0, 0}, labels, mask);
    CHECK(m.at(3).mae == 2.0);
    CHECK(m.at(3).count == 2);
    CHECK(m.count(5) == 0);
    CHECK_THROWS(stratified_mae(std::vector<double>{0, 1}, labels, mask));
  }

  TEST_CASE("merged maps agree with a naive group-by") {
    std::mt19937_64 rng(3);
    std::uniform_int_distribution<std::uint32_t> lab(0, 9);
    std::uniform_real_distribution<double> pred(-2, 12);
    StratifiedMae merged;
    std::map<std::uint32_t, std::vector<double>> raw;
    for (int g = 0; g < 20; ++g) {
      DistanceVector labels;
      std::vector<bool> mask;
      std::vector<double> p;
      for (int v = 0; v < 15; ++v) {
        labels.push_back(lab(rng));
        mask.push_back(v % 4 != 0);
        p.push_back(pred(rng));
        if (mask.back()) raw[*labels.back()].push_back(std::abs(p.back() - *labels.back()));
      }
      merged = merge(merged, stratified_mae(p, labels, mask));
    }
    CHECK(merged.size() == raw.size());
    for (const auto& [d, errs] : raw) {
      double s = 0;
      for (double e : errs) s += e;
      CHECK(merged.at(d).count == errs.size());
      CHECK(merged.at(d).mae == doctest::Approx(s / errs.size()).epsilon(1e-12));
    }
  }

  TEST_CASE("ID/OOR report examples and invariants") {
    const std::vector<SSSPInstance> hand{with_labels({2u, 25u}, {true, true})};
    const auto r = id_oor_report({{2.0, 20.0}}, hand, 20);
    CHECK(r.id_mae == 0.0);
    CHECK(r.oor_mae == 5.0);
    CHECK(r.max_predicted_distance == 20.0);
    CHECK(r.test_mae == 2.5);

    const std::vector<SSSPInstance> in_range{with_labels({1u, 2u}, {true, true})};
    const auto r2 = id_oor_report({{1.5, 2.0}}, in_range, 5);
    CHECK_FALSE(r2.oor_mae.has_value());
    CHECK(r2.to_json().at("oor_mae").is_null());

    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::uint32_t> lab(0, 8);
    std::normal_distribution<double> noise(0, 1);
    std::vector<SSSPInstance> insts;
    std::vector<std::vector<double>> preds;
    for (int g = 0; g < 10; ++g) {
      std::vector<std::optional<std::uint32_t>> l;
      std::vector<bool> m;
      std::vector<double> p;
      for (int v = 0; v < 12; ++v) {
        l.push_back(lab(rng));
        m.push_back(v != 3);
        p.push_back(*l.back() + noise(rng));
      }
      insts.push_back(with_labels(l, m));
      preds.push_back(p);
    }
    const auto rep = id_oor_report(preds, insts, 5);
    std::size_t count = 0, id = 0, oor = 0;
    double weighted = 0;
    for (const auto& [d, e] : rep.per_distance) {
      count += e.count;
      weighted += e.mae * static_cast<double>(e.count);
      (d <= 5 ? id : oor) += e.count;
    }
    CHECK(count == 10 * 11);
    CHECK(id + oor == count);
    CHECK(rep.num_nodes == count);
    CHECK(rep.test_mae == doctest::Approx(weighted / static_cast<double>(count)).epsilon(1e-12));
    CHECK_THROWS(id_oor_report(preds, insts, 0));

    std::ostringstream csv;
    rep.write_csv(csv);
    CHECK(csv.str().rfind("distance,mae,count\n", 0) == 0);
  }

  TEST_CASE("perfect predictions give an all-zero report") {
    RGGConfig c;
    c.train_size = 2;
    c.val_size = 1;
    c.test_size = 3;
    const auto d = build_splits(c);
    std::vector<std::vector<double>> preds;
    for (const auto& inst : d.test) {
      std::vector<double> p;
      for (const auto& l : inst.labels) p.push_back(static_cast<double>(*l));
      preds.push_back(p);
    }
    const auto r = id_oor_report(preds, d.test, 5);
    CHECK(r.test_mae == 0.0);
    for (const auto& [dist, e] : r.per_distance) CHECK(e.mae == 0.0);
  }

  TEST_CASE("ablation CSV schema") {
    const std::vector<SSSPInstance> hand{with_labels({2u, 25u}, {true, true})};
    std::vector<AblationRow> rows{{"ghr_gated_gine", 0, id_oor_report({{2.0, 20.0}}, hand, 20)},
                                  {"ghr_gated_gine", 1, id_oor_report({{3.0, 25.0}}, hand, 20)},
                                  {"deep_gine", 0, id_oor_report({{2.0, 10.0}}, hand, 20)}};
    std::ostringstream s;
    write_ablation_summary(s, rows);
    std::istringstream in(s.str());
    std::string header, first, second, extra;
    std::getline(in, header);
    std::getline(in, first);
    std::getline(in, second);
    CHECK(header == "model_variant,test_mae,id_mae,oor_mae,max_pred");
    CHECK(first.rfind("ghr_gated_gine,1.5,0.5,2.5,22.5", 0) == 0);
    CHECK(second.rfind("deep_gine,", 0) == 0);
    CHECK_FALSE(std::getline(in, extra));
    std::ostringstream runs;
    write_ablation_runs(runs, std::span<const AblationRow>(rows.data(), 1));
    CHECK(runs.str() == "model_variant,seed,test_mae,id_mae,oor_mae,max_pred\nghr_gated_gine,0,2.5,0,5,20\n");
  }
}

TEST_SUITE("baselines") {
  TEST_CASE("deep forward equals composed layer oracles") {
    for (Backbone b : {Backbone::kGine, Backbone::kGatedGine}) {
      const FlatConfig cfg = flat(FlatKind::kDeep, b, 3);
      const ParamStore ps = init_flat_params(cfg, 1);
      const Graph g = sample_graph(1);
      for (std::size_t n : {1u, 2u}) {
        Tape t;
        const Tensor got = t.value(deep_forward(t, g, ps, cfg, n));
        Tensor h = initial(ps, g.num_nodes());
        for (std::size_t k = 0; k < n; ++k) h = flat_iteration(ps, k, g, h);
        CHECK(max_abs_diff(got, oracle::loop_matmul(h, ps.at("readout").value)) <= 1e-10);
      }
    }
  }

  TEST_CASE("zero weights give zero predictions and a fixed state") {
    FlatConfig cfg = flat(FlatKind::kRecurrent, Backbone::kGatedGine, 4);
    ParamStore ps = init_flat_params(cfg, 2);
    ps.at("readout").value.fill(0.0);
    const Graph g = sample_graph(2);
    Tape t;
    CHECK(t.value(recurrent_forward(t, g, ps, cfg, 4)) == Tensor(g.num_nodes(), 1));
    for (const char* n : {"layer0.content", "layer0.gate", "layer0.out"}) ps.at(n).value.fill(0.0);
    ps.at("readout").value = Tensor::ones(5, 1);
    Tape t2;
    const Tensor a = t2.value(recurrent_forward(t2, g, ps, cfg, 1));
    const Tensor b = t2.value(recurrent_forward(t2, g, ps, cfg, 7));
    CHECK(a == b);
  }

  TEST_CASE("recurrent T=1, deep N=1 and flat GR R=1,T=1 coincide bit-exactly") {
    for (Backbone b : {Backbone::kGine, Backbone::kGatedGine}) {
      const FlatConfig deep = flat(FlatKind::kDeep, b, 1);
      FlatConfig rec = deep;
      rec.kind = FlatKind::kRecurrent;
      const ParamStore ps = init_flat_params(deep, 3);
      CHECK(ps.same_values(init_flat_params(rec, 3)));
      const Graph g = sample_graph(3);
      Tape t;
      const Tensor d = t.value(deep_forward(t, g, ps, deep, 1));
      const Tensor r = t.value(recurrent_forward(t, g, ps, rec, 1));
      const Tensor f = t.value(flat_gr_forward(t, g, ps, rec, 1, 1).back());
      CHECK(d == r);
      CHECK(r == f);
    }
  }

  TEST_CASE("flat GR with R=2, T=2 equals four unrolled iterations with two readouts") {
    const FlatConfig cfg = flat(FlatKind::kRecurrent, Backbone::kGatedGine, 2);
    const ParamStore ps = init_flat_params(cfg, 4);
    const Graph g = sample_graph(4);
    Tape t;
    const auto preds = flat_gr_forward(t, g, ps, cfg, 2, 2);
    REQUIRE(preds.size() == 2);
    Tensor h = initial(ps, g.num_nodes());
    for (int k = 0; k < 2; ++k) h = flat_iteration(ps, 0, g, h);
    CHECK(max_abs_diff(t.value(preds[0]), oracle::loop_matmul(h, ps.at("readout").value)) <= 1e-10);
    for (int k = 0; k < 2; ++k) h = flat_iteration(ps, 0, g, h);
    CHECK(max_abs_diff(t.value(preds[1]), oracle::loop_matmul(h, ps.at("readout").value)) <= 1e-10);
    // R = 1 is recurrent_forward.
    Tape t2;
    const Tensor gr = t2.value(flat_gr_forward(t2, g, ps, cfg, 1, 3).back());
    CHECK(gr == t2.value(recurrent_forward(t2, g, ps, cfg, 3)));
  }

  TEST_CASE("deep depth is fixed, recurrent depth changes only the iteration count") {
    FlatConfig rec = flat(FlatKind::kRecurrent, Backbone::kGine, 20);
    rec.infer_depth = 30;
    FlatModel m(rec, 5);
    CHECK(m.iteration_counts(false).at("iterations") == 20);
    CHECK(m.iteration_counts(true).at("iterations") == 30);
    CHECK(m.params().size() == init_flat_params(flat(FlatKind::kRecurrent, Backbone::kGine, 20), 5).size());
    const FlatConfig deep = flat(FlatKind::kDeep, Backbone::kGine, 2);
    Tape t;
    CHECK_THROWS(deep_forward(t, sample_graph(5), init_flat_params(deep, 5), deep, 3));
  }

  TEST_CASE("baselines are permutation equivariant and pass gradient checks") {
    for (FlatKind kind : {FlatKind::kDeep, FlatKind::kRecurrent}) {
      FlatConfig cfg = flat(kind, Backbone::kGatedGine, 2);
      cfg.global_steps = 2;
      FlatModel model(cfg, 6);
      Rng rng = make_rng(6, "test/flatperm");
      const auto h = model.prepare(sample_graph(6), rng);
      CHECK(permutation_deviation(model, h, rng) <= 1e-9);

      Rng r2 = make_rng(7, "test/flatgrad");
      const auto inst = generate_instance(10, 12, 6.0, r2, SourcePolicy::kResampleWithinCap, 5, 20, 1000);
      const auto hi = model.prepare(inst.graph, r2);
      const auto res = full_model_grad_check(model, inst, hi);
      INFO("worst " << res.worst_parameter);
      CHECK(res.max_relative_error <= 1e-4);
    }
  }
}
