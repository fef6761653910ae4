#include "ghr/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "ghr/error.hpp"

namespace ghr {

using nlohmann::json;

namespace {

// Running sums keyed by label; MAE is computed once at the end so merging is
// order-independent up to floating-point summation order.
struct Accumulator {
  double sum = 0.0;
  std::size_t count = 0;
};

std::string format_optional(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os.precision(17);
  os << *v;
  return os.str();
}

}  // namespace

StratifiedMae stratified_mae(std::span<const double> predictions, const DistanceVector& labels,
                             const std::vector<bool>& mask) {
  require(predictions.size() == labels.size() && labels.size() == mask.size(),
          ErrorCode::kShapeMismatch, "predictions, labels and mask must have equal length");
  std::map<std::uint32_t, Accumulator> acc;
  for (std::size_t v = 0; v < labels.size(); ++v) {
    if (!mask[v] || !labels[v]) continue;
    auto& a = acc[*labels[v]];
    a.sum += std::abs(predictions[v] - static_cast<double>(*labels[v]));
    ++a.count;
  }
  StratifiedMae out;
  for (const auto& [d, a] : acc) out[d] = {a.sum / static_cast<double>(a.count), a.count};
  return out;
}

StratifiedMae merge(const StratifiedMae& a, const StratifiedMae& b) {
  StratifiedMae out = a;
  for (const auto& [d, e] : b) {
    auto it = out.find(d);
    if (it == out.end()) {
      out[d] = e;
      continue;
    }
    const double total = static_cast<double>(it->second.count + e.count);
    it->second.mae = (it->second.mae * static_cast<double>(it->second.count) +
                      e.mae * static_cast<double>(e.count)) /
                     total;
    it->second.count += e.count;
  }
  return out;
}

EvalReport id_oor_report(const std::vector<std::vector<double>>& predictions,
                         std::span<const SSSPInstance> instances, std::uint32_t train_cap) {
  require(train_cap > 0, ErrorCode::kInvalidConfig, "train_cap must be positive");
  require(predictions.size() == instances.size(), ErrorCode::kShapeMismatch,
          "one prediction vector per instance required");
  std::map<std::uint32_t, Accumulator> acc;
  double max_pred = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const auto& inst = instances[i];
    require(predictions[i].size() == inst.labels.size(), ErrorCode::kShapeMismatch,
            "prediction length mismatch");
    for (std::size_t v = 0; v < inst.labels.size(); ++v) {
      if (!inst.mask[v] || !inst.labels[v]) continue;
      auto& a = acc[*inst.labels[v]];
      a.sum += std::abs(predictions[i][v] - static_cast<double>(*inst.labels[v]));
      ++a.count;
      max_pred = std::max(max_pred, predictions[i][v]);
    }
  }
  EvalReport r;
  r.train_cap = train_cap;
  Accumulator id, oor, all;
  for (const auto& [d, a] : acc) {
    r.per_distance[d] = {a.sum / static_cast<double>(a.count), a.count};
    auto& part = d <= train_cap ? id : oor;
    part.sum += a.sum;
    part.count += a.count;
    all.sum += a.sum;
    all.count += a.count;
  }
  if (id.count) r.id_mae = id.sum / static_cast<double>(id.count);
  if (oor.count) r.oor_mae = oor.sum / static_cast<double>(oor.count);
  r.num_nodes = all.count;
  r.test_mae = all.count ? all.sum / static_cast<double>(all.count) : 0.0;
  r.max_predicted_distance = all.count ? max_pred : 0.0;
  return r;
}

json EvalReport::to_json() const {
  json per = json::array();
  for (const auto& [d, e] : per_distance) per.push_back({{"distance", d}, {"mae", e.mae}, {"count", e.count}});
  return {{"per_distance", per},
          {"train_cap", train_cap},
          {"id_mae", id_mae ? json(*id_mae) : json(nullptr)},
          {"oor_mae", oor_mae ? json(*oor_mae) : json(nullptr)},
          {"test_mae", test_mae},
          {"max_predicted_distance", max_predicted_distance},
          {"num_nodes", num_nodes}};
}

void EvalReport::write_csv(std::ostream& os) const {
  const auto old = os.precision(17);
  os << "distance,mae,count\n";
  for (const auto& [d, e] : per_distance) os << d << ',' << e.mae << ',' << e.count << '\n';
  os.precision(old);
}

void write_ablation_runs(std::ostream& os, std::span<const AblationRow> rows) {
  const auto old = os.precision(17);
  os << "model_variant,seed,test_mae,id_mae,oor_mae,max_pred\n";
  for (const auto& row : rows) {
    const auto& r = row.report;
    os << row.variant << ',' << row.seed << ',' << r.test_mae << ',' << format_optional(r.id_mae)
       << ',' << format_optional(r.oor_mae) << ',' << r.max_predicted_distance << '\n';
  }
  os.precision(old);
}

void write_ablation_summary(std::ostream& os, std::span<const AblationRow> rows) {
  std::vector<std::string> order;
  for (const auto& row : rows)
    if (std::find(order.begin(), order.end(), row.variant) == order.end()) order.push_back(row.variant);
  const auto old = os.precision(17);
  os << "model_variant,test_mae,id_mae,oor_mae,max_pred\n";
  for (const auto& v : order) {
    double test = 0.0, maxp = 0.0, id = 0.0, oor = 0.0;
    std::size_t n = 0, n_id = 0, n_oor = 0;
    for (const auto& row : rows) {
      if (row.variant != v) continue;
      ++n;
      test += row.report.test_mae;
      maxp += row.report.max_predicted_distance;
      if (row.report.id_mae) id += *row.report.id_mae, ++n_id;
      if (row.report.oor_mae) oor += *row.report.oor_mae, ++n_oor;
    }
    const auto mean = [](double s, std::size_t k) -> std::optional<double> {
      if (k == 0) return std::nullopt;
      return s / static_cast<double>(k);
    };
    os << v << ',' << test / static_cast<double>(n) << ',' << format_optional(mean(id, n_id)) << ','
       << format_optional(mean(oor, n_oor)) << ',' << maxp / static_cast<double>(n) << '\n';
  }
  os.precision(old);
}

}  // namespace ghr
