#include "ghr/hierarchy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "ghr/error.hpp"

namespace ghr {

std::string_view to_string(Reduce r) {
  switch (r) {
    case Reduce::kSum: return "sum";
    case Reduce::kMean: return "mean";
    case Reduce::kMax: return "max";
  }
  return "sum";
}

Reduce parse_reduce(std::string_view name) {
  if (name == "sum") return Reduce::kSum;
  if (name == "mean") return Reduce::kMean;
  if (name == "max") return Reduce::kMax;
  fail(ErrorCode::kInvalidConfig, "unknown reduce '" + std::string(name) + "'");
}

void ClusterAssignment::validate() const {
  std::vector<bool> seen(num_clusters, false);
  for (auto c : cluster_of) {
    require(c < num_clusters, ErrorCode::kInvalidAssignment,
            "cluster id " + std::to_string(c) + " >= " + std::to_string(num_clusters));
    seen[c] = true;
  }
  require(std::all_of(seen.begin(), seen.end(), [](bool s) { return s; }),
          ErrorCode::kInvalidAssignment, "cluster ids are not surjective");
}

std::vector<std::vector<NodeId>> ClusterAssignment::members() const {
  std::vector<std::vector<NodeId>> out(num_clusters);
  for (NodeId u = 0; u < cluster_of.size(); ++u) out[cluster_of[u]].push_back(u);
  return out;
}

ClusterAssignment ClusterAssignment::identity(std::size_t n) {
  ClusterAssignment a;
  a.cluster_of.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) a.cluster_of[i] = i;
  a.num_clusters = n;
  return a;
}

ClusterAssignment compose(const ClusterAssignment& inner, const ClusterAssignment& outer) {
  require(outer.num_low_nodes() == inner.num_clusters, ErrorCode::kInvalidAssignment,
          "cannot compose assignments of mismatched size");
  ClusterAssignment a;
  a.num_clusters = outer.num_clusters;
  a.cluster_of.resize(inner.num_low_nodes());
  for (std::size_t u = 0; u < a.cluster_of.size(); ++u)
    a.cluster_of[u] = outer.cluster_of[inner.cluster_of[u]];
  return a;
}

ClusterAssignment graclus_match(const Graph& g, Rng& rng) {
  constexpr auto kUnmatched = std::numeric_limits<std::uint32_t>::max();
  const std::size_t n = g.num_nodes();
  std::vector<std::uint32_t> partner(n, kUnmatched);
  std::vector<bool> matched(n, false);
  for (NodeId u : random_permutation(rng, n)) {
    if (matched[u]) continue;
    matched[u] = true;
    NodeId best = kUnmatched;
    std::size_t best_degree = std::numeric_limits<std::size_t>::max();
    for (NodeId w : g.neighbors(u)) {  // ascending, so strict < keeps the smallest index
      if (matched[w]) continue;
      const auto d = g.degree(w);
      if (d < best_degree) {
        best = w;
        best_degree = d;
      }
    }
    if (best != kUnmatched) {
      matched[best] = true;
      partner[u] = best;
      partner[best] = u;
    }
  }
  ClusterAssignment a;
  a.cluster_of.assign(n, kUnmatched);
  std::uint32_t next = 0;
  for (NodeId u = 0; u < n; ++u) {
    if (a.cluster_of[u] != kUnmatched) continue;
    a.cluster_of[u] = next;
    if (partner[u] != kUnmatched) a.cluster_of[partner[u]] = next;
    ++next;
  }
  a.num_clusters = next;
  return a;
}

Tensor pool_features(const Tensor& x, const ClusterAssignment& a, Reduce reduce) {
  require(x.rows() == a.num_low_nodes(), ErrorCode::kShapeMismatch,
          "pool_features: X has " + std::to_string(x.rows()) + " rows, assignment covers " +
              std::to_string(a.num_low_nodes()));
  const std::size_t d = x.cols();
  Tensor out(a.num_clusters, d, reduce == Reduce::kMax ? -std::numeric_limits<double>::infinity() : 0.0);
  std::vector<std::size_t> counts(a.num_clusters, 0);
  for (std::size_t u = 0; u < x.rows(); ++u) {
    const auto c = a.cluster_of[u];
    ++counts[c];
    for (std::size_t k = 0; k < d; ++k) {
      if (reduce == Reduce::kMax)
        out(c, k) = std::max(out(c, k), x(u, k));
      else
        out(c, k) += x(u, k);
    }
  }
  if (reduce == Reduce::kMean) {
    for (std::size_t c = 0; c < a.num_clusters; ++c)
      for (std::size_t k = 0; k < d; ++k) out(c, k) /= static_cast<double>(counts[c]);
  }
  return out;
}

Tensor unpool_features(const Tensor& x_high, const ClusterAssignment& a) {
  require(x_high.rows() == a.num_clusters, ErrorCode::kShapeMismatch,
          "unpool_features: X_H rows must equal num_clusters");
  Tensor out(a.num_low_nodes(), x_high.cols());
  for (std::size_t u = 0; u < a.num_low_nodes(); ++u) {
    const auto src = x_high.row_span(a.cluster_of[u]);
    std::copy(src.begin(), src.end(), out.row_span(u).begin());
  }
  return out;
}

Graph quotient_graph(const Graph& g, const ClusterAssignment& a, Reduce edge_reduce,
                     Reduce node_reduce) {
  require(a.num_low_nodes() == g.num_nodes(), ErrorCode::kInvalidAssignment,
          "assignment covers " + std::to_string(a.num_low_nodes()) + " nodes, graph has " +
              std::to_string(g.num_nodes()));
  a.validate();
  const std::size_t de = g.edge_features().cols();
  // Ordered map keeps high edges in lexicographic order.
  std::map<Edge, std::vector<std::size_t>> images;
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    auto ca = a.cluster_of[g.edges()[k].first];
    auto cb = a.cluster_of[g.edges()[k].second];
    if (ca == cb) continue;
    if (ca > cb) std::swap(ca, cb);
    images[{ca, cb}].push_back(k);
  }
  std::vector<Edge> edges;
  edges.reserve(images.size());
  Tensor ef(images.size(), de);
  std::size_t row = 0;
  for (const auto& [edge, sources] : images) {
    edges.push_back(edge);
    for (std::size_t c = 0; c < de; ++c) {
      double acc = edge_reduce == Reduce::kMax ? -std::numeric_limits<double>::infinity() : 0.0;
      for (auto k : sources) {
        const double v = g.edge_features()(k, c);
        acc = edge_reduce == Reduce::kMax ? std::max(acc, v) : acc + v;
      }
      if (edge_reduce == Reduce::kMean) acc /= static_cast<double>(sources.size());
      ef(row, c) = acc;
    }
    ++row;
  }
  return build_graph(a.num_clusters, std::move(edges), pool_features(g.node_features(), a, node_reduce),
                     std::move(ef));
}

PoolPlan make_pool_plan(const ClusterAssignment& a) {
  const auto members = a.members();
  std::size_t widest = 0;
  for (const auto& m : members) widest = std::max(widest, m.size());
  PoolPlan plan;
  plan.slots.assign(widest, std::vector<std::uint32_t>(a.num_clusters));
  plan.inverse_size.resize(a.num_clusters);
  for (std::size_t c = 0; c < a.num_clusters; ++c) {
    const auto& m = members[c];
    for (std::size_t k = 0; k < widest; ++k) plan.slots[k][c] = k < m.size() ? m[k] : m.front();
    plan.inverse_size[c] = 1.0 / static_cast<double>(m.size());
  }
  return plan;
}

double Hierarchy::node_ratio() const {
  if (low.num_nodes() == 0) return 1.0;
  return static_cast<double>(high.num_nodes()) / static_cast<double>(low.num_nodes());
}

Hierarchy make_hierarchy(Graph low, ClusterAssignment assignment, Reduce feature_reduce,
                         Reduce edge_reduce) {
  Hierarchy h;
  h.high = quotient_graph(low, assignment, edge_reduce, feature_reduce);
  h.low = std::move(low);
  h.feature_reduce = feature_reduce;
  h.pool_plan = std::make_shared<const PoolPlan>(make_pool_plan(assignment));
  h.cluster_index = std::make_shared<const std::vector<std::uint32_t>>(assignment.cluster_of);
  h.assignment = std::move(assignment);
  return h;
}

Hierarchy build_hierarchy(const Graph& g, std::size_t iterations, Reduce feature_reduce,
                          Reduce edge_reduce, Rng& rng) {
  require(iterations >= 1, ErrorCode::kInvalidConfig, "hierarchy needs at least one iteration");
  ClusterAssignment total = ClusterAssignment::identity(g.num_nodes());
  Graph current = g;
  for (std::size_t it = 0; it < iterations; ++it) {
    const ClusterAssignment step = graclus_match(current, rng);
    total = compose(total, step);
    current = quotient_graph(current, step, edge_reduce, feature_reduce);
  }
  return make_hierarchy(g, std::move(total), feature_reduce, edge_reduce);
}

double block_center_distance(std::size_t block, std::size_t blocks_per_side, std::uint32_t a,
                             std::uint32_t b) {
  const auto bx = [&](std::uint32_t c) { return static_cast<double>(c % blocks_per_side); };
  const auto by = [&](std::uint32_t c) { return static_cast<double>(c / blocks_per_side); };
  const double s = static_cast<double>(block);
  return s * std::hypot(bx(a) - bx(b), by(a) - by(b));
}

BlockPooling geometric_block_assignment(std::size_t side, std::size_t block) {
  require(block >= 1 && side % block == 0, ErrorCode::kNonDivisibleBlock,
          "block size " + std::to_string(block) + " does not divide side " + std::to_string(side));
  BlockPooling out;
  out.blocks_per_side = side / block;
  out.assignment.num_clusters = out.blocks_per_side * out.blocks_per_side;
  out.assignment.cluster_of.resize(side * side);
  for (std::size_t y = 0; y < side; ++y)
    for (std::size_t x = 0; x < side; ++x)
      out.assignment.cluster_of[y * side + x] =
          static_cast<std::uint32_t>((y / block) * out.blocks_per_side + x / block);
  const auto nb = out.blocks_per_side;
  for (std::uint32_t by = 0; by < nb; ++by)
    for (std::uint32_t bx = 0; bx < nb; ++bx) {
      const std::uint32_t c = by * static_cast<std::uint32_t>(nb) + bx;
      if (bx + 1 < nb) out.high_edges.push_back({c, c + 1});
      if (by + 1 < nb) out.high_edges.push_back({c, c + static_cast<std::uint32_t>(nb)});
    }
  std::sort(out.high_edges.begin(), out.high_edges.end());
  out.high_edge_features = Tensor(out.high_edges.size(), 1);
  for (std::size_t k = 0; k < out.high_edges.size(); ++k)
    out.high_edge_features(k, 0) =
        block_center_distance(block, nb, out.high_edges[k].first, out.high_edges[k].second);
  return out;
}

Graph lattice_graph(std::size_t side) {
  std::vector<Edge> edges;
  for (std::uint32_t y = 0; y < side; ++y)
    for (std::uint32_t x = 0; x < side; ++x) {
      const std::uint32_t v = y * static_cast<std::uint32_t>(side) + x;
      if (x + 1 < side) edges.push_back({v, v + 1});
      if (y + 1 < side) edges.push_back({v, v + static_cast<std::uint32_t>(side)});
    }
  const auto m = edges.size();
  return build_graph(side * side, std::move(edges), Tensor(side * side, 1), Tensor(m, 1, 1.0));
}

}  // namespace ghr
