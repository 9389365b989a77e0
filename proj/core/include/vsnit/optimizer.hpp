#pragma once

#include <cstdint>
#include <vector>

#include "vsnit/tensor.hpp"

namespace vsnit::optim {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// First and second moments aligned with a ParameterStore's order.
struct AdamState {
  std::uint64_t t = 0;
  std::vector<nn::Tensor> m;
  std::vector<nn::Tensor> v;

  static AdamState zeros(const nn::ParameterStore& params);
};

double global_grad_norm(const nn::ParameterStore& params);

// Rescales all gradients so their joint L2 norm is at most max_norm; returns
// the norm before clipping.
double clip_global_norm(nn::ParameterStore& params, double max_norm);

// Bias-corrected Adam update from the gradients currently stored on `params`.
// Returns false and leaves parameters and moments untouched when any gradient
// entry is non-finite.
bool adam_step(nn::ParameterStore& params, AdamState& state, const AdamConfig& config);

}  // namespace vsnit::optim
