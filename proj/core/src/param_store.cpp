#include "ghr/param_store.hpp"

#include <cmath>

#include "ghr/error.hpp"

namespace ghr {

std::size_t ParamStore::add(std::string name, Tensor value, bool trainable) {
  require(!contains(name), ErrorCode::kInvalidConfig, "duplicate parameter '" + name + "'");
  Parameter p;
  p.grad = Tensor(value.rows(), value.cols());
  p.first_moment = Tensor(value.rows(), value.cols());
  p.second_moment = Tensor(value.rows(), value.cols());
  p.value = std::move(value);
  p.trainable = trainable;
  p.name = std::move(name);
  by_name_.emplace(p.name, entries_.size());
  entries_.push_back(std::move(p));
  return entries_.size() - 1;
}

bool ParamStore::contains(std::string_view name) const {
  return by_name_.find(std::string(name)) != by_name_.end();
}

std::size_t ParamStore::index(std::string_view name) const {
  const auto it = by_name_.find(std::string(name));
  require(it != by_name_.end(), ErrorCode::kInvalidConfig,
          "unknown parameter '" + std::string(name) + "'");
  return it->second;
}

void ParamStore::zero_grad() {
  for (auto& p : entries_) p.grad.fill(0.0);
}

double ParamStore::grad_norm() const {
  double s = 0.0;
  for (const auto& p : entries_) {
    if (!p.trainable) continue;
    for (double g : p.grad.values()) s += g * g;
  }
  return std::sqrt(s);
}

std::size_t ParamStore::num_trainable_values() const {
  std::size_t n = 0;
  for (const auto& p : entries_)
    if (p.trainable) n += p.value.size();
  return n;
}

bool ParamStore::same_values(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.trainable != b.trainable || !(a.value == b.value)) return false;
  }
  return true;
}

}  // namespace ghr
