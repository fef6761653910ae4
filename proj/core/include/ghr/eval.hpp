#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghr/rgg.hpp"

namespace ghr {

struct DistanceError {
  double mae = 0.0;
  std::size_t count = 0;
};

// Integer label -> MAE and sample count over masked-in nodes.
using StratifiedMae = std::map<std::uint32_t, DistanceError>;

// Throws ShapeMismatch when lengths differ.
StratifiedMae stratified_mae(std::span<const double> predictions, const DistanceVector& labels,
                             const std::vector<bool>& mask);

// Count-weighted merge of per-instance maps.
StratifiedMae merge(const StratifiedMae& a, const StratifiedMae& b);

struct EvalReport {
  StratifiedMae per_distance;
  std::uint32_t train_cap = 0;
  std::optional<double> id_mae;   // labels <= cap
  std::optional<double> oor_mae;  // labels > cap; absent when there are none
  double test_mae = 0.0;
  double max_predicted_distance = 0.0;  // raw final predictions
  std::size_t num_nodes = 0;

  nlohmann::json to_json() const;
  // distance,mae,count
  void write_csv(std::ostream& os) const;
};

EvalReport id_oor_report(const std::vector<std::vector<double>>& predictions,
                         std::span<const SSSPInstance> instances, std::uint32_t train_cap);

struct AblationRow {
  std::string variant;
  std::uint64_t seed = 0;
  EvalReport report;
};

// model_variant,seed,test_mae,id_mae,oor_mae,max_pred (one row per run).
void write_ablation_runs(std::ostream& os, std::span<const AblationRow> rows);

// model_variant,test_mae,id_mae,oor_mae,max_pred averaged over seeds, in
// first-appearance order of the variants.
void write_ablation_summary(std::ostream& os, std::span<const AblationRow> rows);

}  // namespace ghr
