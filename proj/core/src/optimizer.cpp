#include "vsnit/optimizer.hpp"

#include <cmath>

#include "vsnit/error.hpp"

namespace vsnit::optim {

AdamState AdamState::zeros(const nn::ParameterStore& params) {
  AdamState s;
  for (const auto& p : params) {
    s.m.emplace_back(p.shape(), 0.0);
    s.v.emplace_back(p.shape(), 0.0);
  }
  return s;
}

double global_grad_norm(const nn::ParameterStore& params) {
  double total = 0.0;
  for (const auto& p : params)
    for (double g : p.grad().data()) total += g * g;
  return std::sqrt(total);
}

double clip_global_norm(nn::ParameterStore& params, double max_norm) {
  const double norm = global_grad_norm(params);
  if (!std::isfinite(norm) || norm <= max_norm) return norm;
  const double factor = max_norm / norm;
  for (auto& p : params)
    for (auto& g : p.grad().data()) g *= factor;
  return norm;
}

bool adam_step(nn::ParameterStore& params, AdamState& state, const AdamConfig& config) {
  if (state.m.size() != params.size() || state.v.size() != params.size()) {
    throw DimensionError("optimizer state does not match parameter count");
  }
  for (const auto& p : params) {
    if (!p.grad().all_finite()) return false;
  }
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double c1 = 1.0 - std::pow(config.beta1, t);
  const double c2 = 1.0 - std::pow(config.beta2, t);
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto w = params[k].value().data();
    const auto g = params[k].grad().data();
    auto m = state.m[k].data();
    auto v = state.v[k].data();
    for (std::size_t i = 0; i < w.size(); ++i) {
      m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g[i];
      v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g[i] * g[i];
      const double mhat = m[i] / c1;
      const double vhat = v[i] / c2;
      w[i] -= config.lr * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
  return true;
}

}  // namespace vsnit::optim
