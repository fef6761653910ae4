#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ghr/tensor.hpp"

namespace ghr {

struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;
  // Adaptive-moment optimizer state.
  Tensor first_moment;
  Tensor second_moment;
  bool trainable = true;
};

// Ordered collection of named tensors. Non-trainable entries (frozen initial
// states) live here too so they are checkpointed alongside the weights.
class ParamStore {
 public:
  std::size_t add(std::string name, Tensor value, bool trainable = true);

  bool contains(std::string_view name) const;
  std::size_t index(std::string_view name) const;

  Parameter& operator[](std::size_t i) { return entries_[i]; }
  const Parameter& operator[](std::size_t i) const { return entries_[i]; }
  Parameter& at(std::string_view name) { return entries_[index(name)]; }
  const Parameter& at(std::string_view name) const { return entries_[index(name)]; }

  std::size_t size() const noexcept { return entries_.size(); }
  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  void zero_grad();
  double grad_norm() const;
  // Number of trainable scalar values.
  std::size_t num_trainable_values() const;

  // Bit-exact comparison of names, shapes, values and trainability.
  bool same_values(const ParamStore& other) const;

 private:
  std::vector<Parameter> entries_;
  std::unordered_map<std::string, std::size_t> by_name_;
};

}  // namespace ghr
