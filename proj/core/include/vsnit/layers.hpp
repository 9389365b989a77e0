#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsnit/ops.hpp"
#include "vsnit/rng.hpp"
#include "vsnit/tensor.hpp"

namespace vsnit::layers {

using nn::Parameter;
using nn::ParameterStore;
using nn::Var;

// Glorot-uniform weight matrix registered in `store`.
Parameter make_weight(ParameterStore& store, const std::string& name, std::size_t fan_in,
                      std::size_t fan_out, Rng& rng);
Parameter make_bias(ParameterStore& store, const std::string& name, std::size_t width,
                    double fill = 0.0);

// sigmoid(x W4 + b4) * (x W5 + b5)
struct Glu {
  Parameter w4, b4, w5, b5;

  static Glu create(ParameterStore& store, const std::string& prefix, std::size_t in,
                    std::size_t out, Rng& rng);
  Var forward(const Var& gamma) const;
};

struct GrnDims {
  std::size_t in = 0;
  std::size_t hidden = 0;
  std::size_t out = 0;
  std::size_t context = 0;  // 0: no context input
};

// Gated residual network:
//   eta2 = ELU(a W2 + c W3 + b2); eta1 = eta2 W1 + b1; out = LayerNorm(skip(a) + GLU(eta1))
// where skip is the identity when in == out and a bias-free projection otherwise.
// Context may be one row (broadcast over all rows of `a`) or one row per row of `a`.
struct Grn {
  GrnDims dims;
  Parameter w2, b2, w1, b1;
  std::optional<Parameter> w3;
  std::optional<Parameter> skip;
  Glu glu;
  Parameter ln_gain, ln_bias;

  static Grn create(ParameterStore& store, const std::string& prefix, GrnDims dims, Rng& rng);
  Var forward(const Var& a, const Var* context = nullptr) const;
};

// Softmax-weighted fusion of per-stream GRN outputs; selection logits come from
// a GRN over the concatenated streams conditioned on the static context.
struct Vsn {
  std::size_t streams = 0;
  std::size_t width = 0;
  Grn selector;
  std::vector<Grn> per_stream;

  struct Output {
    Var fused;    // [N x width]
    Var weights;  // [N x streams], rows sum to 1
  };

  static Vsn create(ParameterStore& store, const std::string& prefix, std::size_t streams,
                    std::size_t width, std::size_t context_width, Rng& rng);
  Output forward(std::span<const Var> inputs, const Var* static_context) const;
};

// Bidirectional multi-head self-attention; columns with key_mask false are invisible.
struct MultiHeadAttention {
  std::size_t heads = 0;
  std::size_t d_attn = 0;
  std::size_t d_val = 0;
  std::vector<Parameter> wq, wk, wv;
  Parameter wh;

  static MultiHeadAttention create(ParameterStore& store, const std::string& prefix,
                                   std::size_t d_model, std::size_t heads, std::size_t d_attn,
                                   std::size_t d_val, Rng& rng);
  Var forward(const Var& x, const std::vector<bool>& key_mask) const;
};

// Sinusoidal position encoding, [rows x width].
nn::Tensor positional_encoding(std::size_t rows, std::size_t width);

}  // namespace vsnit::layers
