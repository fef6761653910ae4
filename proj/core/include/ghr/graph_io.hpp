#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghr/graph.hpp"

namespace ghr {

// Line-delimited JSON graph records. Keys: num_nodes, edges ([[i,j],...]),
// node_features, edge_features (row arrays) and optional positions.
// Doubles are written in shortest round-trip form, so reading back yields
// bit-identical values.
nlohmann::json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const nlohmann::json& j, std::size_t expected_cols = 0);

nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

std::string graph_to_line(const Graph& g);
Graph graph_from_line(const std::string& line);

void write_graphs(std::ostream& os, const std::vector<Graph>& graphs);
std::vector<Graph> read_graphs(std::istream& is);

}  // namespace ghr
