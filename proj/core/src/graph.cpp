#include "ghr/graph.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "ghr/error.hpp"

namespace ghr {

Graph::Graph(std::size_t num_nodes, std::vector<Edge> edges, Tensor node_features,
             Tensor edge_features)
    : num_nodes_(num_nodes),
      edges_(std::move(edges)),
      node_features_(std::move(node_features)),
      edge_features_(std::move(edge_features)) {
  std::vector<std::uint32_t> degree(num_nodes_ + 1, 0);
  for (const auto& [a, b] : edges_) {
    ++degree[a + 1];
    ++degree[b + 1];
  }
  for (std::size_t i = 1; i <= num_nodes_; ++i) degree[i] += degree[i - 1];
  std::vector<NodeId> adjacency(2 * edges_.size());
  std::vector<std::uint32_t> cursor(degree.begin(), degree.end() - 1);
  for (const auto& [a, b] : edges_) {
    adjacency[cursor[a]++] = b;
    adjacency[cursor[b]++] = a;
  }
  for (std::size_t i = 0; i < num_nodes_; ++i)
    std::sort(adjacency.begin() + degree[i], adjacency.begin() + degree[i + 1]);

  auto arcs = std::make_shared<ArcIndex>();
  arcs->src.reserve(2 * edges_.size());
  arcs->dst.reserve(2 * edges_.size());
  arcs->edge.reserve(2 * edges_.size());
  for (std::uint32_t k = 0; k < edges_.size(); ++k) {
    const auto [a, b] = edges_[k];
    arcs->src.push_back(a);
    arcs->dst.push_back(b);
    arcs->edge.push_back(k);
    arcs->src.push_back(b);
    arcs->dst.push_back(a);
    arcs->edge.push_back(k);
  }
  offsets_ = std::make_shared<const std::vector<std::uint32_t>>(std::move(degree));
  adjacency_ = std::make_shared<const std::vector<NodeId>>(std::move(adjacency));
  arcs_ = std::move(arcs);
}

std::span<const NodeId> Graph::neighbors(NodeId v) const {
  require(v < num_nodes_, ErrorCode::kIndexOutOfRange, "node " + std::to_string(v));
  const auto& off = *offsets_;
  return {adjacency_->data() + off[v], off[v + 1] - off[v]};
}

std::size_t Graph::degree(NodeId v) const { return neighbors(v).size(); }

bool Graph::has_edge(NodeId a, NodeId b) const {
  if (a >= num_nodes_ || b >= num_nodes_) return false;
  const auto nb = neighbors(a);
  return std::binary_search(nb.begin(), nb.end(), b);
}

Graph Graph::with_node_features(Tensor node_features) const {
  require(node_features.rows() == num_nodes_, ErrorCode::kShapeMismatch,
          "node feature rows must equal num_nodes");
  Graph g = *this;
  g.node_features_ = std::move(node_features);
  return g;
}

Graph Graph::with_positions(Tensor positions) const {
  require(positions.rows() == num_nodes_ && positions.cols() == 2, ErrorCode::kShapeMismatch,
          "positions must be num_nodes x 2");
  Graph g = *this;
  g.positions_ = std::move(positions);
  return g;
}

Graph build_graph(std::size_t num_nodes, std::vector<Edge> edges, Tensor node_features,
                  Tensor edge_features, std::optional<Tensor> positions) {
  require(node_features.rows() == num_nodes, ErrorCode::kShapeMismatch,
          "node_features has " + std::to_string(node_features.rows()) + " rows, expected " +
              std::to_string(num_nodes));
  require(edge_features.rows() == edges.size(), ErrorCode::kShapeMismatch,
          "edge_features has " + std::to_string(edge_features.rows()) + " rows, expected " +
              std::to_string(edges.size()));
  if (positions) {
    require(positions->rows() == num_nodes && positions->cols() == 2, ErrorCode::kShapeMismatch,
            "positions must be num_nodes x 2");
  }
  std::vector<Edge> sorted;
  sorted.reserve(edges.size());
  for (auto& [a, b] : edges) {
    require(a < num_nodes && b < num_nodes, ErrorCode::kIndexOutOfRange,
            "edge {" + std::to_string(a) + "," + std::to_string(b) + "}");
    require(a != b, ErrorCode::kSelfLoop, "self-loop at node " + std::to_string(a));
    if (a > b) std::swap(a, b);
    sorted.push_back({a, b});
  }
  std::sort(sorted.begin(), sorted.end());
  const auto dup = std::adjacent_find(sorted.begin(), sorted.end());
  require(dup == sorted.end(), ErrorCode::kDuplicateEdge,
          dup == sorted.end()
              ? std::string()
              : "{" + std::to_string(dup->first) + "," + std::to_string(dup->second) + "}");
  Graph g(num_nodes, std::move(edges), std::move(node_features), std::move(edge_features));
  g.positions_ = std::move(positions);
  return g;
}

DistanceVector bfs_distances(const Graph& g, NodeId source) {
  require(source < g.num_nodes(), ErrorCode::kIndexOutOfRange,
          "source " + std::to_string(source));
  DistanceVector dist(g.num_nodes());
  std::vector<NodeId> frontier{source};
  frontier.reserve(g.num_nodes());
  dist[source] = 0;
  for (std::size_t head = 0; head < frontier.size(); ++head) {
    const NodeId v = frontier[head];
    for (NodeId w : g.neighbors(v)) {
      if (!dist[w]) {
        dist[w] = *dist[v] + 1;
        frontier.push_back(w);
      }
    }
  }
  return dist;
}

std::uint32_t eccentricity(const Graph& g, NodeId source) {
  std::uint32_t ecc = 0;
  for (const auto& d : bfs_distances(g, source))
    if (d) ecc = std::max(ecc, *d);
  return ecc;
}

std::optional<std::uint32_t> diameter(const Graph& g) {
  if (g.num_nodes() == 0) return std::nullopt;
  std::uint32_t best = 0;
  for (NodeId s = 0; s < g.num_nodes(); ++s) best = std::max(best, eccentricity(g, s));
  return best;
}

std::vector<std::uint32_t> connected_components(const Graph& g, std::size_t* count) {
  constexpr auto kUnset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(g.num_nodes(), kUnset);
  std::uint32_t next = 0;
  std::vector<NodeId> stack;
  for (NodeId s = 0; s < g.num_nodes(); ++s) {
    if (comp[s] != kUnset) continue;
    comp[s] = next;
    stack.push_back(s);
    while (!stack.empty()) {
      const NodeId v = stack.back();
      stack.pop_back();
      for (NodeId w : g.neighbors(v)) {
        if (comp[w] == kUnset) {
          comp[w] = next;
          stack.push_back(w);
        }
      }
    }
    ++next;
  }
  if (count) *count = next;
  return comp;
}

Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes) {
  constexpr auto kAbsent = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> remap(g.num_nodes(), kAbsent);
  for (std::uint32_t i = 0; i < nodes.size(); ++i) remap[nodes[i]] = i;

  const Tensor& nf = g.node_features();
  Tensor node_features(nodes.size(), nf.cols());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    std::copy_n(nf.row_span(nodes[i]).begin(), nf.cols(), node_features.row_span(i).begin());

  std::vector<Edge> edges;
  std::vector<std::size_t> kept;
  for (std::size_t k = 0; k < g.num_edges(); ++k) {
    const auto [a, b] = g.edges()[k];
    if (remap[a] != kAbsent && remap[b] != kAbsent) {
      edges.push_back({remap[a], remap[b]});
      kept.push_back(k);
    }
  }
  const Tensor& ef = g.edge_features();
  Tensor edge_features(kept.size(), ef.cols());
  for (std::size_t i = 0; i < kept.size(); ++i)
    std::copy_n(ef.row_span(kept[i]).begin(), ef.cols(), edge_features.row_span(i).begin());

  std::optional<Tensor> positions;
  if (g.positions()) {
    positions = Tensor(nodes.size(), 2);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      (*positions)(i, 0) = (*g.positions())(nodes[i], 0);
      (*positions)(i, 1) = (*g.positions())(nodes[i], 1);
    }
  }
  return {build_graph(nodes.size(), std::move(edges), std::move(node_features),
                      std::move(edge_features), std::move(positions)),
          std::vector<NodeId>(nodes.begin(), nodes.end())};
}

Subgraph largest_component(const Graph& g) {
  std::size_t count = 0;
  const auto comp = connected_components(g, &count);
  std::vector<std::size_t> sizes(count, 0);
  for (auto c : comp) ++sizes[c];
  // Components are numbered by smallest member, so the first maximum wins ties.
  const auto best = static_cast<std::uint32_t>(
      std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<NodeId> nodes;
  for (NodeId v = 0; v < g.num_nodes(); ++v)
    if (comp[v] == best) nodes.push_back(v);
  return induced_subgraph(g, nodes);
}

}  // namespace ghr
