#include "vsnit/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "vsnit/error.hpp"

namespace vsnit::nn {

namespace {

double evaluate(const std::function<Var()>& forward) {
  const Var loss = forward();
  if (loss.value().size() != 1) {
    throw DimensionError("grad_check: loss is not scalar " + shape_string(loss.shape()));
  }
  const double v = loss.value()[0];
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite loss");
  return v;
}

}  // namespace

GradientReport grad_check(const std::string& op_name, const std::function<Var()>& forward,
                          std::span<Parameter> params, double eps) {
  for (auto& p : params) p.zero_grad();
  const Var loss = forward();
  if (!std::isfinite(loss.value()[0])) throw NumericError("grad_check: non-finite loss");
  backward(loss);

  GradientReport report{op_name, 0.0, {}};
  for (auto& p : params) {
    const Tensor analytic = p.grad();
    ParameterError entry{p.name(), 0.0};
    auto values = p.value().data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      values[i] = saved + eps;
      const double up = evaluate(forward);
      values[i] = saved - eps;
      const double down = evaluate(forward);
      values[i] = saved;
      const double numeric = (up - down) / (2.0 * eps);
      const double a = analytic[i];
      const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
      entry.max_rel_error = std::max(entry.max_rel_error, err);
    }
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.per_parameter.push_back(std::move(entry));
  }
  return report;
}

}  // namespace vsnit::nn
