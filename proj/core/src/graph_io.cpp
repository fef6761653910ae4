#include "ghr/graph_io.hpp"

#include <istream>
#include <ostream>

#include "ghr/error.hpp"

namespace ghr {

using nlohmann::json;

json tensor_to_json(const Tensor& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.rows(); ++r) {
    json row = json::array();
    for (double v : t.row_span(r)) row.push_back(v);
    rows.push_back(std::move(row));
  }
  return rows;
}

Tensor tensor_from_json(const json& j, std::size_t expected_cols) {
  require(j.is_array(), ErrorCode::kFormat, "matrix must be an array of rows");
  const std::size_t rows = j.size();
  std::size_t cols = expected_cols;
  if (rows > 0) cols = j.front().size();
  Tensor t(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto& row = j[r];
    require(row.is_array() && row.size() == cols, ErrorCode::kShapeMismatch, "ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) t(r, c) = row[c].get<double>();
  }
  return t;
}

json graph_to_json(const Graph& g) {
  json j;
  j["num_nodes"] = g.num_nodes();
  json edges = json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({a, b});
  j["edges"] = std::move(edges);
  j["node_features"] = tensor_to_json(g.node_features());
  j["edge_features"] = tensor_to_json(g.edge_features());
  if (g.positions()) j["positions"] = tensor_to_json(*g.positions());
  return j;
}

Graph graph_from_json(const json& j) {
  try {
    const auto n = j.at("num_nodes").get<std::size_t>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      require(e.is_array() && e.size() == 2, ErrorCode::kFormat, "edge must be [i, j]");
      edges.push_back({e[0].get<NodeId>(), e[1].get<NodeId>()});
    }
    Tensor nf = tensor_from_json(j.at("node_features"), 1);
    Tensor ef = tensor_from_json(j.at("edge_features"), 1);
    std::optional<Tensor> pos;
    if (j.contains("positions")) pos = tensor_from_json(j.at("positions"), 2);
    return build_graph(n, std::move(edges), std::move(nf), std::move(ef), std::move(pos));
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, e.what());
  }
}

std::string graph_to_line(const Graph& g) { return graph_to_json(g).dump(); }

Graph graph_from_line(const std::string& line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    fail(ErrorCode::kFormat, e.what());
  }
  return graph_from_json(j);
}

void write_graphs(std::ostream& os, const std::vector<Graph>& graphs) {
  for (const auto& g : graphs) os << graph_to_line(g) << '\n';
}

std::vector<Graph> read_graphs(std::istream& is) {
  std::vector<Graph> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    out.push_back(graph_from_line(line));
  }
  return out;
}

}  // namespace ghr
