#pragma once

#include <functional>
#include <string>

#include "ghr/param_store.hpp"
#include "ghr/tape.hpp"

namespace ghr {

// Builds a scalar loss on a fresh tape from the current parameter values.
using LossBuilder = std::function<Var(Tape&, const ParamStore&)>;

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t worst_entry = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t entries_checked = 0;
};

// Central differences (f(p+h) - f(p-h)) / 2h against the tape gradient for
// every trainable entry. Relative error uses max(|analytic|, |numeric|, 1e-12)
// as denominator. Parameter values and gradients are restored on return.
GradCheckResult finite_difference_check(const LossBuilder& loss, ParamStore& params, double step);

// Evaluates the loss without differentiating.
double evaluate_loss(const LossBuilder& loss, const ParamStore& params);

}  // namespace ghr
