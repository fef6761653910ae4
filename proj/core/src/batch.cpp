#include "ghr/batch.hpp"

#include <algorithm>

#include "ghr/error.hpp"

namespace ghr {

Graph disjoint_union(std::span<const Graph* const> graphs) {
  require(!graphs.empty(), ErrorCode::kInvalidConfig, "empty union");
  const std::size_t dn = graphs.front()->node_features().cols();
  const std::size_t de = graphs.front()->edge_features().cols();
  std::size_t nodes = 0, edges = 0;
  for (const Graph* g : graphs) {
    require(g->node_features().cols() == dn && g->edge_features().cols() == de,
            ErrorCode::kShapeMismatch, "union of graphs with different feature widths");
    nodes += g->num_nodes();
    edges += g->num_edges();
  }
  std::vector<Edge> all_edges;
  all_edges.reserve(edges);
  Tensor nf(nodes, dn), ef(edges, de);
  std::size_t node_off = 0, edge_off = 0;
  for (const Graph* g : graphs) {
    const auto off = static_cast<NodeId>(node_off);
    for (const auto& [a, b] : g->edges()) all_edges.push_back({a + off, b + off});
    std::copy(g->node_features().values().begin(), g->node_features().values().end(),
              nf.data() + node_off * dn);
    std::copy(g->edge_features().values().begin(), g->edge_features().values().end(),
              ef.data() + edge_off * de);
    node_off += g->num_nodes();
    edge_off += g->num_edges();
  }
  return build_graph(nodes, std::move(all_edges), std::move(nf), std::move(ef));
}

Hierarchy disjoint_union(std::span<const Hierarchy* const> parts) {
  require(!parts.empty(), ErrorCode::kInvalidConfig, "empty union");
  if (parts.size() == 1) return *parts.front();
  std::vector<const Graph*> lows, highs;
  ClusterAssignment a;
  for (const Hierarchy* h : parts) {
    require(h->feature_reduce == parts.front()->feature_reduce, ErrorCode::kInvalidConfig,
            "union of hierarchies with different feature reduces");
    lows.push_back(&h->low);
    highs.push_back(&h->high);
    const auto off = static_cast<std::uint32_t>(a.num_clusters);
    for (auto c : h->assignment.cluster_of) a.cluster_of.push_back(c + off);
    a.num_clusters += h->assignment.num_clusters;
  }
  Hierarchy out;
  out.low = disjoint_union(lows);
  out.high = disjoint_union(highs);
  out.feature_reduce = parts.front()->feature_reduce;
  out.pool_plan = std::make_shared<const PoolPlan>(make_pool_plan(a));
  out.cluster_index = std::make_shared<const std::vector<std::uint32_t>>(a.cluster_of);
  out.assignment = std::move(a);
  return out;
}

Batch make_batch(std::span<const SSSPInstance* const> instances,
                 std::span<const Hierarchy* const> hierarchies) {
  require(instances.size() == hierarchies.size() && !instances.empty(), ErrorCode::kInvalidConfig,
          "batch needs one hierarchy per instance");
  Batch b;
  b.hierarchy = disjoint_union(hierarchies);
  const std::size_t total = b.hierarchy.low.num_nodes();
  b.targets = Tensor(total, 1);
  b.weights = Tensor(total, 1);
  b.node_offsets.push_back(0);
  const double batch_size = static_cast<double>(instances.size());
  std::size_t off = 0;
  for (std::size_t k = 0; k < instances.size(); ++k) {
    const SSSPInstance& inst = *instances[k];
    require(inst.graph.num_nodes() == hierarchies[k]->low.num_nodes(), ErrorCode::kShapeMismatch,
            "hierarchy does not match instance graph");
    const auto count = static_cast<double>(std::count(inst.mask.begin(), inst.mask.end(), true));
    for (std::size_t v = 0; v < inst.graph.num_nodes(); ++v) {
      if (!inst.mask[v]) continue;
      b.targets(off + v, 0) = static_cast<double>(*inst.labels[v]);
      b.weights(off + v, 0) = 1.0 / (count * batch_size);
    }
    off += inst.graph.num_nodes();
    b.node_offsets.push_back(off);
  }
  return b;
}

}  // namespace ghr
