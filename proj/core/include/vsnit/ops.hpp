#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vsnit/rng.hpp"
#include "vsnit/tensor.hpp"

// Differentiable operations. Every op records its adjoint on the tape when any
// input requires a gradient. Matrices are [rows x cols]; a rank-1 tensor of
// width d is accepted wherever a 1 x d row is.
namespace vsnit::nn {

inline constexpr double kLayerNormEps = 1e-5;
inline constexpr double kEluAlpha = 1.0;

Var matmul(const Var& a, const Var& b);
// x W + b, with b broadcast over rows.
Var linear(const Var& x, const Var& w, const Var& b);
Var linear(const Var& x, const Var& w);

Var add(const Var& a, const Var& b);
// Adds a single row (1 x d or rank-1 d) to every row of x.
Var add_row(const Var& x, const Var& row);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, double factor);
// Multiplies row r of x by s[r, 0]; s is [rows x 1].
Var scale_rows(const Var& x, const Var& s);

Var elu(const Var& x);
Var sigmoid(const Var& x);

// Stabilized softmax along `axis` (0 or 1 for matrices; 0 for vectors).
Var softmax(const Var& x, std::size_t axis);
// Row softmax where columns with key_mask[c] == false get probability 0.
// A row with no visible column yields all zeros.
Var masked_softmax_rows(const Var& x, const std::vector<bool>& key_mask);
Var log_softmax_rows(const Var& x);

// Per row: (x - mean) / sqrt(var + eps) * gain + bias, population variance.
Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps = kLayerNormEps);

// Row `index` of a [V x d] table as a 1 x d matrix.
Var embed_lookup(const Var& table, std::size_t index);
// Gathers rows of a [V x d] table into [indices.size() x d].
Var embed_rows(const Var& table, std::span<const std::size_t> indices);

Var concat_cols(std::span<const Var> parts);
Var slice_rows(const Var& x, std::size_t begin, std::size_t count);
Var slice_cols(const Var& x, std::size_t begin, std::size_t count);
Var transpose(const Var& x);

Var sum(const Var& x);
// Inverted dropout; identity when rate == 0.
Var dropout(const Var& x, double rate, Rng& rng);

}  // namespace vsnit::nn
