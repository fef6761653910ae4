#include "ghr/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ghr/error.hpp"

namespace ghr {

double evaluate_loss(const LossBuilder& loss, const ParamStore& params) {
  Tape tape;
  const Var l = loss(tape, params);
  return tape.value(l)[0];
}

GradCheckResult finite_difference_check(const LossBuilder& loss, ParamStore& params, double step) {
  require(step > 0.0, ErrorCode::kInvalidConfig, "finite-difference step must be positive");
  std::vector<Tensor> saved_grads;
  saved_grads.reserve(params.size());
  for (auto& p : params) saved_grads.push_back(p.grad);
  params.zero_grad();
  {
    Tape tape;
    const Var l = loss(tape, params);
    tape.backward(l, params);
  }
  GradCheckResult result;
  for (auto& p : params) {
    if (!p.trainable) continue;
    for (std::size_t k = 0; k < p.value.size(); ++k) {
      const double original = p.value[k];
      p.value[k] = original + step;
      const double up = evaluate_loss(loss, params);
      p.value[k] = original - step;
      const double down = evaluate_loss(loss, params);
      p.value[k] = original;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p.grad[k];
      const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
      const double rel = std::abs(analytic - numeric) / denom;
      ++result.entries_checked;
      if (rel > result.max_relative_error || result.entries_checked == 1) {
        result.max_relative_error = rel;
        result.worst_parameter = p.name;
        result.worst_entry = k;
        result.analytic = analytic;
        result.numeric = numeric;
      }
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i].grad = std::move(saved_grads[i]);
  return result;
}

}  // namespace ghr
