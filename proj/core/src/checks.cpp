#include "ghr/checks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ghr/batch.hpp"
#include "ghr/error.hpp"
#include "ghr/rgg.hpp"

namespace ghr {

Hierarchy permute_hierarchy(const Hierarchy& h, const std::vector<NodeId>& perm, Rng& rng) {
  const Graph& g = h.low;
  const std::size_t n = g.num_nodes();
  require(perm.size() == n, ErrorCode::kShapeMismatch, "permutation length mismatch");

  const auto order = random_permutation(rng, g.num_edges());
  std::vector<Edge> edges;
  Tensor ef(g.num_edges(), g.edge_features().cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto [a, b] = g.edges()[order[k]];
    const bool flip = uniform01(rng) < 0.5;
    edges.emplace_back(flip ? perm[b] : perm[a], flip ? perm[a] : perm[b]);
    for (std::size_t c = 0; c < ef.cols(); ++c) ef(k, c) = g.edge_features()(order[k], c);
  }
  Tensor nf(n, g.node_features().cols());
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t c = 0; c < nf.cols(); ++c) nf(perm[v], c) = g.node_features()(v, c);
  Graph low = build_graph(n, std::move(edges), std::move(nf), std::move(ef));

  const auto cluster_perm = random_permutation(rng, h.assignment.num_clusters);
  ClusterAssignment a;
  a.num_clusters = h.assignment.num_clusters;
  a.cluster_of.resize(n);
  for (std::size_t v = 0; v < n; ++v) a.cluster_of[perm[v]] = cluster_perm[h.assignment.cluster_of[v]];
  // Edge reduce is fixed to sum; RGG edge features are uniform so this
  // matches every configured hierarchy built by the harness.
  return make_hierarchy(std::move(low), std::move(a), h.feature_reduce, Reduce::kSum);
}

double permutation_deviation(const Model& model, const Hierarchy& h, Rng& rng) {
  const auto p = random_permutation(rng, h.low.num_nodes());
  const std::vector<NodeId> perm(p.begin(), p.end());
  const Hierarchy hp = permute_hierarchy(h, perm, rng);
  Tape t1, t2;
  const auto a = model.forward(t1, h, false);
  const auto b = model.forward(t2, hp, false);
  double worst = 0.0;
  for (std::size_t r = 0; r < a.size(); ++r) {
    const Tensor& x = t1.value(a[r]);
    const Tensor& y = t2.value(b[r]);
    for (std::size_t v = 0; v < perm.size(); ++v) worst = std::max(worst, std::abs(x[v] - y[perm[v]]));
  }
  return worst;
}

std::size_t lipschitz_violations(const Hierarchy& h) {
  const auto& c = h.assignment.cluster_of;
  std::vector<DistanceVector> high;
  high.reserve(h.high.num_nodes());
  for (NodeId s = 0; s < h.high.num_nodes(); ++s) high.push_back(bfs_distances(h.high, s));
  std::size_t violations = 0;
  for (NodeId u = 0; u < h.low.num_nodes(); ++u) {
    const auto dl = bfs_distances(h.low, u);
    for (NodeId v = 0; v < h.low.num_nodes(); ++v) {
      if (!dl[v]) continue;
      const auto& dh = high[c[u]][c[v]];
      if (!dh || *dh > *dl[v]) ++violations;
    }
  }
  return violations;
}

std::vector<CheckOutcome> run_self_checks(std::uint64_t seed) {
  std::vector<CheckOutcome> out;
  std::ostringstream detail;

  // Gradient check on a small GHR instance.
  {
    GHRConfig cfg;
    cfg.hidden = 8;
    cfg.global_steps = 2;
    cfg.high_iters = 2;
    cfg.low_iters = 2;
    GhrModel model(cfg, seed);
    Rng rng = make_rng(seed, "selfcheck/grad");
    const auto inst = generate_instance(12, 12, 6.0, rng, SourcePolicy::kResampleWithinCap, 5, 20, 1000);
    const auto h = model.prepare(inst.graph, rng);
    const auto r = full_model_grad_check(model, inst, h);
    detail.str("");
    detail << "max relative error " << r.max_relative_error << " (" << r.worst_parameter << ")";
    out.push_back({"gradient", r.max_relative_error <= 1e-4, detail.str()});
  }

  // Pooling: 1-Lipschitz distances and non-increasing diameter.
  {
    std::size_t violations = 0, diameter_failures = 0;
    for (std::size_t i = 0; i < 20; ++i) {
      Rng rng = make_rng(seed, "selfcheck/pool", i);
      const Graph g = sample_rgg(20, 80, 8.0, rng);
      const Hierarchy h = build_hierarchy(g, 3, Reduce::kMax, Reduce::kSum, rng);
      violations += lipschitz_violations(h);
      if (diameter(h.high).value_or(0) > diameter(h.low).value_or(0)) ++diameter_failures;
    }
    detail.str("");
    detail << violations << " distance violations, " << diameter_failures << " diameter increases";
    out.push_back({"pooling", violations == 0 && diameter_failures == 0, detail.str()});
  }

  // Permutation equivariance.
  {
    GHRConfig cfg;
    cfg.hidden = 8;
    cfg.global_steps = 2;
    cfg.high_iters = 2;
    cfg.low_iters = 2;
    GhrModel model(cfg, seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < 5; ++i) {
      Rng rng = make_rng(seed, "selfcheck/perm", i);
      const auto inst = generate_instance(15, 30, 8.0, rng, SourcePolicy::kResampleWithinCap, 5, 20, 1000);
      const auto h = model.prepare(inst.graph, rng);
      worst = std::max(worst, permutation_deviation(model, h, rng));
    }
    detail.str("");
    detail << "max deviation " << worst;
    out.push_back({"permutation", worst <= 1e-9, detail.str()});
  }

  // Zero weights leave the zero state fixed and predict zero.
  {
    GHRConfig cfg;
    cfg.hidden = 8;
    cfg.global_steps = 2;
    cfg.high_iters = 2;
    cfg.low_iters = 2;
    GhrModel model(cfg, seed);
    for (auto& p : model.params()) p.value.fill(0.0);
    Rng rng = make_rng(seed, "selfcheck/zero");
    const auto inst = generate_instance(15, 30, 8.0, rng, SourcePolicy::kResampleWithinCap, 5, 20, 1000);
    const auto h = model.prepare(inst.graph, rng);
    Tape tape;
    const auto preds = model.forward(tape, h, false);
    double worst = 0.0;
    for (const Var v : preds)
      for (const double x : tape.value(v).values()) worst = std::max(worst, std::abs(x));
    detail.str("");
    detail << "max |prediction| " << worst;
    out.push_back({"zero-weights", worst == 0.0, detail.str()});
  }
  return out;
}

}  // namespace ghr
