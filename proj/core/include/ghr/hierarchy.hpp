#pragma once

#include <cstdint>
#include <memory>
#include <string_view>
#include <vector>

#include "ghr/graph.hpp"
#include "ghr/random.hpp"
#include "ghr/tensor.hpp"

namespace ghr {

enum class Reduce { kSum, kMean, kMax };

std::string_view to_string(Reduce r);
Reduce parse_reduce(std::string_view name);

// Partition of low-level nodes into clusters 0..num_clusters-1.
struct ClusterAssignment {
  std::vector<std::uint32_t> cluster_of;
  std::size_t num_clusters = 0;

  std::size_t num_low_nodes() const noexcept { return cluster_of.size(); }
  // Throws InvalidAssignment unless ids are contiguous and surjective.
  void validate() const;
  // Members of each cluster, ascending.
  std::vector<std::vector<NodeId>> members() const;

  static ClusterAssignment identity(std::size_t n);
};

// outer(inner(u)): inner maps nodes to level-1 clusters, outer maps those
// to level-2 clusters.
ClusterAssignment compose(const ClusterAssignment& inner, const ClusterAssignment& outer);

// One greedy Graclus pass. Nodes are visited in a seeded random order; an
// unmatched node is paired with its unmatched neighbor of minimum degree
// (smallest index on ties). Cluster ids follow the smallest member index.
ClusterAssignment graclus_match(const Graph& g, Rng& rng);

// Row c of the result reduces the rows of X belonging to cluster c.
Tensor pool_features(const Tensor& x, const ClusterAssignment& a, Reduce reduce);

// Row u of the result copies row cluster_of(u) of x_high.
Tensor unpool_features(const Tensor& x_high, const ClusterAssignment& a);

// High-level graph: one node per cluster, an edge {a,b} for every pair of
// distinct clusters joined by a low-level edge. Edge features reduce over
// all low edges mapping to the same high edge; node features are pooled
// with node_reduce. High edges are ordered lexicographically.
Graph quotient_graph(const Graph& g, const ClusterAssignment& a, Reduce edge_reduce,
                     Reduce node_reduce = Reduce::kSum);

// Gather plan for pooling built from primitive tensor ops: slots[k][c] is the
// k-th member of cluster c, or its first member when the cluster is smaller.
struct PoolPlan {
  std::vector<std::vector<std::uint32_t>> slots;
  std::vector<double> inverse_size;
};

PoolPlan make_pool_plan(const ClusterAssignment& a);

struct Hierarchy {
  Graph low;
  Graph high;
  ClusterAssignment assignment;
  Reduce feature_reduce = Reduce::kMax;
  std::shared_ptr<const PoolPlan> pool_plan;
  std::shared_ptr<const std::vector<std::uint32_t>> cluster_index;

  // |V_H| / |V_L|.
  double node_ratio() const;
};

Hierarchy make_hierarchy(Graph low, ClusterAssignment assignment, Reduce feature_reduce,
                         Reduce edge_reduce);

// Composes `iterations` Graclus passes into a single low->high assignment.
Hierarchy build_hierarchy(const Graph& g, std::size_t iterations, Reduce feature_reduce,
                          Reduce edge_reduce, Rng& rng);

struct BlockPooling {
  ClusterAssignment assignment;
  std::size_t blocks_per_side = 0;
  // Edges between 4-adjacent blocks, feature = distance between centers.
  std::vector<Edge> high_edges;
  Tensor high_edge_features;
};

// Node (x, y) of an L x L lattice (id = y * L + x) maps to block
// (x / b, y / b), linearized row-major. Throws NonDivisibleBlock.
BlockPooling geometric_block_assignment(std::size_t side, std::size_t block);

// Euclidean distance between the centers of two blocks at unit spacing.
double block_center_distance(std::size_t block, std::size_t blocks_per_side, std::uint32_t a,
                             std::uint32_t b);

// 4-neighbour L x L lattice with unit edge features and zero node features.
Graph lattice_graph(std::size_t side);

}  // namespace ghr
