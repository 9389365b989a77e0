#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "vsnit/tensor.hpp"

namespace vsnit::nn {

struct ParameterError {
  std::string name;
  double max_rel_error = 0.0;
};

struct GradientReport {
  std::string op_name;
  double max_rel_error = 0.0;
  std::vector<ParameterError> per_parameter;
};

// Compares tape gradients of a scalar loss against central finite differences
// for every entry of `params`. Error per entry is
// |analytic - numeric| / max(1, |analytic|, |numeric|).
// `forward` must rebuild the graph from the current parameter values on each call.
GradientReport grad_check(const std::string& op_name, const std::function<Var()>& forward,
                          std::span<Parameter> params, double eps = 1e-5);

}  // namespace vsnit::nn
