#pragma once

#include <span>
#include <vector>

#include "ghr/hierarchy.hpp"
#include "ghr/rgg.hpp"

namespace ghr {

// Disjoint union of graphs; node ids of part k are offset by the sizes of
// parts 0..k-1.
Graph disjoint_union(std::span<const Graph* const> graphs);

// Disjoint union of hierarchies (low graphs, high graphs and assignments).
Hierarchy disjoint_union(std::span<const Hierarchy* const> parts);

struct Batch {
  Hierarchy hierarchy;
  Tensor targets;  // total_nodes x 1; 0 where masked out
  // total_nodes x 1 loss weights: 1 / (masked-in count of the graph * batch
  // size) on masked-in nodes, 0 elsewhere. The weighted mean therefore
  // averages the per-graph masked mean over the batch.
  Tensor weights;
  std::vector<std::size_t> node_offsets;  // size parts + 1
};

Batch make_batch(std::span<const SSSPInstance* const> instances,
                 std::span<const Hierarchy* const> hierarchies);

}  // namespace ghr
