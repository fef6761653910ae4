#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ghr/hierarchy.hpp"
#include "ghr/random.hpp"
#include "ghr/training.hpp"

namespace ghr {

// Relabels low nodes by `perm` (new id = perm[old]), shuffles the edge list
// and flips edge orientation at random, and renumbers clusters by a random
// permutation. The result describes the same hierarchy up to isomorphism.
Hierarchy permute_hierarchy(const Hierarchy& h, const std::vector<NodeId>& perm, Rng& rng);

// Largest |pred(v) - pred'(perm[v])| over all steps and nodes.
double permutation_deviation(const Model& model, const Hierarchy& h, Rng& rng);

// Node pairs (u, v) with d_H(c(u), c(v)) > d_L(u, v).
std::size_t lipschitz_violations(const Hierarchy& h);

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Gradient, pooling and permutation checks on small seeded instances.
std::vector<CheckOutcome> run_self_checks(std::uint64_t seed);

}  // namespace ghr
