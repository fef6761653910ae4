// Independent oracles and small fixtures shared by the unit tests. Nothing
// here calls into the library's algorithms, so agreement is meaningful.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include <string>

#include "ghr/graph.hpp"
#include "ghr/param_store.hpp"
#include "ghr/tensor.hpp"

namespace oracle {

inline constexpr std::uint32_t kInf = std::numeric_limits<std::uint32_t>::max() / 4;

using Matrix = std::vector<std::vector<std::uint32_t>>;

inline Matrix floyd_warshall(std::size_t n, const std::vector<ghr::Edge>& edges) {
  Matrix d(n, std::vector<std::uint32_t>(n, kInf));
  for (std::size_t i = 0; i < n; ++i) d[i][i] = 0;
  for (auto [a, b] : edges) d[a][b] = d[b][a] = 1;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (d[i][k] + d[k][j] < d[i][j]) d[i][j] = d[i][k] + d[k][j];
  return d;
}

struct UnionFind {
  std::vector<std::size_t> parent, size;
  explicit UnionFind(std::size_t n) : parent(n), size(n, 1) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (size[a] < size[b]) std::swap(a, b);
    parent[b] = a;
    size[a] += size[b];
  }
};

// Sorted component sizes, largest first.
inline std::vector<std::size_t> component_sizes(std::size_t n, const std::vector<ghr::Edge>& edges) {
  UnionFind uf(n);
  for (auto [a, b] : edges) uf.unite(a, b);
  std::vector<std::size_t> sizes;
  for (std::size_t v = 0; v < n; ++v)
    if (uf.find(v) == v) sizes.push_back(uf.size[v]);
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

inline ghr::Tensor loop_matmul(const ghr::Tensor& a, const ghr::Tensor& b) {
  ghr::Tensor out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  return out;
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Plain-loop reference for (1 + eps) h_i + sum_{j -> i} relu(h_j + e_ji).
inline ghr::Tensor aggregate(const ghr::Tensor& h, const ghr::Graph& g, const ghr::Tensor& e_arc, double eps) {
  ghr::Tensor out(h.rows(), h.cols());
  for (std::size_t i = 0; i < h.rows(); ++i)
    for (std::size_t c = 0; c < h.cols(); ++c) out(i, c) = (1 + eps) * h(i, c);
  for (std::size_t k = 0; k < g.edges().size(); ++k) {
    const auto [a, b] = g.edges()[k];
    // Arc 2k runs a -> b, arc 2k+1 runs b -> a.
    for (std::size_t c = 0; c < h.cols(); ++c) {
      out(b, c) += std::max(0.0, h(a, c) + e_arc(2 * k, c));
      out(a, c) += std::max(0.0, h(b, c) + e_arc(2 * k + 1, c));
    }
  }
  return out;
}

inline ghr::Tensor rms_norm(const ghr::Tensor& x, const ghr::Tensor& w) {
  ghr::Tensor y(x.rows(), x.cols());
  for (std::size_t r = 0; r < x.rows(); ++r) {
    double ms = 0;
    for (std::size_t c = 0; c < x.cols(); ++c) ms += x(r, c) * x(r, c);
    ms /= static_cast<double>(x.cols());
    for (std::size_t c = 0; c < x.cols(); ++c) y(r, c) = w(0, c) * x(r, c) / std::sqrt(ms + 1e-8);
  }
  return y;
}

inline ghr::Tensor swiglu(const ghr::Tensor& x, const ghr::Tensor& wc, const ghr::Tensor& wg, const ghr::Tensor& wo) {
  ghr::Tensor c = loop_matmul(x, wc), g = loop_matmul(x, wg);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= g[k] * sigmoid(g[k]);
  return loop_matmul(c, wo);
}


inline ghr::Tensor relu(ghr::Tensor x) {
  for (auto& v : x.values()) v = std::max(0.0, v);
  return x;
}

inline ghr::Tensor plus(ghr::Tensor a, const ghr::Tensor& b) {
  for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
  return a;
}

// Update(Aggr(RMSNorm(x))) for the layer stored under `prefix`.
inline ghr::Tensor mp_update(const ghr::ParamStore& ps, const std::string& prefix, const ghr::Tensor& x,
                             const ghr::Graph& g, const ghr::Tensor& e_arc) {
  const auto& p = [&](const char* s) -> const ghr::Tensor& { return ps.at(prefix + s).value; };
  const ghr::Tensor a = aggregate(rms_norm(x, p(".norm")), g, e_arc, p(".eps")(0, 0));
  if (ps.contains(prefix + ".content")) return swiglu(a, p(".content"), p(".gate"), p(".out"));
  return relu(loop_matmul(relu(loop_matmul(a, p(".mlp1"))), p(".mlp2")));
}

// Per-arc edge rows: arc 2k and 2k+1 both read edge row k.
inline ghr::Tensor arc_rows(const ghr::Tensor& per_edge) {
  ghr::Tensor out(2 * per_edge.rows(), per_edge.cols());
  for (std::size_t k = 0; k < per_edge.rows(); ++k)
    for (std::size_t c = 0; c < per_edge.cols(); ++c) out(2 * k, c) = out(2 * k + 1, c) = per_edge(k, c);
  return out;
}

// Erdos-Renyi edge list with independent std:: randomness.
inline std::vector<ghr::Edge> random_edges(std::size_t n, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<ghr::Edge> edges;
  for (ghr::NodeId i = 0; i < n; ++i)
    for (ghr::NodeId j = i + 1; j < n; ++j)
      if (coin(rng)) edges.emplace_back(i, j);
  return edges;
}

inline ghr::Tensor random_tensor(std::size_t rows, std::size_t cols, std::uint64_t seed,
                                 double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-scale, scale);
  ghr::Tensor t(rows, cols);
  for (auto& x : t.values()) x = u(rng);
  return t;
}

}  // namespace oracle

namespace fixture {

inline ghr::Graph make(std::size_t n, std::vector<ghr::Edge> edges, std::size_t dn = 1,
                       std::size_t de = 1) {
  const std::size_t m = edges.size();
  return ghr::build_graph(n, std::move(edges), ghr::Tensor(n, dn), ghr::Tensor(m, de, 1.0));
}

inline ghr::Graph path(std::size_t n) {
  std::vector<ghr::Edge> e;
  for (ghr::NodeId i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make(n, e);
}

inline ghr::Graph cycle(std::size_t n) {
  std::vector<ghr::Edge> e;
  for (ghr::NodeId i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return make(n, e);
}

inline ghr::Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
  return make(n, oracle::random_edges(n, p, seed));
}

}  // namespace fixture
