#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ghr/tensor.hpp"

namespace ghr {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

// Directed view of the undirected edge list. Edge k expands to arc 2k (i->j)
// and arc 2k+1 (j->i); both arcs reference edge-feature row k.
struct ArcIndex {
  std::vector<std::uint32_t> src;
  std::vector<std::uint32_t> dst;
  std::vector<std::uint32_t> edge;
};

// Immutable undirected attributed graph. Copies share the adjacency index.
class Graph {
 public:
  Graph() : Graph(0, {}, Tensor(0, 1), Tensor(0, 1)) {}

  std::size_t num_nodes() const noexcept { return num_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  std::size_t num_arcs() const noexcept { return 2 * edges_.size(); }

  // Edges are stored with first < second, in input order.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const Tensor& node_features() const noexcept { return node_features_; }
  const Tensor& edge_features() const noexcept { return edge_features_; }
  const std::optional<Tensor>& positions() const noexcept { return positions_; }

  std::span<const NodeId> neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const;
  bool has_edge(NodeId a, NodeId b) const;

  const ArcIndex& arcs() const noexcept { return *arcs_; }
  std::shared_ptr<const ArcIndex> shared_arcs() const noexcept { return arcs_; }

  // Same topology with replaced feature matrices (row counts must match).
  Graph with_node_features(Tensor node_features) const;
  Graph with_positions(Tensor positions) const;

  friend Graph build_graph(std::size_t, std::vector<Edge>, Tensor, Tensor, std::optional<Tensor>);

 private:
  Graph(std::size_t num_nodes, std::vector<Edge> edges, Tensor node_features, Tensor edge_features);

  std::size_t num_nodes_ = 0;
  std::vector<Edge> edges_;
  Tensor node_features_;
  Tensor edge_features_;
  std::optional<Tensor> positions_;
  // CSR adjacency, neighbors sorted ascending.
  std::shared_ptr<const std::vector<std::uint32_t>> offsets_;
  std::shared_ptr<const std::vector<NodeId>> adjacency_;
  std::shared_ptr<const ArcIndex> arcs_;
};

// Validates and canonicalizes. Throws IndexOutOfRange, DuplicateEdge,
// SelfLoop or ShapeMismatch.
Graph build_graph(std::size_t num_nodes, std::vector<Edge> edges, Tensor node_features,
                  Tensor edge_features, std::optional<Tensor> positions = std::nullopt);

// Hop count, or nullopt when unreachable.
using Distance = std::optional<std::uint32_t>;
using DistanceVector = std::vector<Distance>;

DistanceVector bfs_distances(const Graph& g, NodeId source);

// Largest finite distance from source.
std::uint32_t eccentricity(const Graph& g, NodeId source);

// Maximum finite shortest-path distance over all node pairs (per-component
// maximum for disconnected graphs). nullopt only for the 0-node graph.
std::optional<std::uint32_t> diameter(const Graph& g);

// Component id per node, numbered in order of smallest member.
std::vector<std::uint32_t> connected_components(const Graph& g, std::size_t* count = nullptr);

struct Subgraph {
  Graph graph;
  // original_index[new_id] = id in the input graph.
  std::vector<NodeId> original_index;
};

// Induced subgraph on the largest component; ties go to the component with
// the smallest minimum node index.
Subgraph largest_component(const Graph& g);

// Induced subgraph on the given (sorted, unique) node subset.
Subgraph induced_subgraph(const Graph& g, std::span<const NodeId> nodes);

}  // namespace ghr
