#include "vsnit/layers.hpp"

#include <cmath>

#include "vsnit/error.hpp"

namespace vsnit::layers {

Parameter make_weight(ParameterStore& store, const std::string& name, std::size_t fan_in,
                      std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  nn::Tensor w({fan_in, fan_out});
  for (auto& v : w.data()) v = rng.uniform(-limit, limit);
  return store.add(name, std::move(w));
}

Parameter make_bias(ParameterStore& store, const std::string& name, std::size_t width, double fill) {
  return store.add(name, nn::Tensor({width}, fill));
}

Glu Glu::create(ParameterStore& store, const std::string& prefix, std::size_t in, std::size_t out,
                Rng& rng) {
  Glu g;
  g.w4 = make_weight(store, prefix + ".w4", in, out, rng);
  g.b4 = make_bias(store, prefix + ".b4", out);
  g.w5 = make_weight(store, prefix + ".w5", in, out, rng);
  g.b5 = make_bias(store, prefix + ".b5", out);
  return g;
}

Var Glu::forward(const Var& gamma) const {
  const Var gate = nn::sigmoid(nn::linear(gamma, w4, b4));
  return nn::mul(gate, nn::linear(gamma, w5, b5));
}

Grn Grn::create(ParameterStore& store, const std::string& prefix, GrnDims dims, Rng& rng) {
  if (dims.in == 0 || dims.hidden == 0 || dims.out == 0) {
    throw ConfigError(prefix + ": GRN widths must be positive");
  }
  Grn g;
  g.dims = dims;
  g.w2 = make_weight(store, prefix + ".w2", dims.in, dims.hidden, rng);
  if (dims.context > 0) g.w3 = make_weight(store, prefix + ".w3", dims.context, dims.hidden, rng);
  g.b2 = make_bias(store, prefix + ".b2", dims.hidden);
  g.w1 = make_weight(store, prefix + ".w1", dims.hidden, dims.out, rng);
  g.b1 = make_bias(store, prefix + ".b1", dims.out);
  g.glu = Glu::create(store, prefix + ".glu", dims.out, dims.out, rng);
  if (dims.in != dims.out) g.skip = make_weight(store, prefix + ".skip", dims.in, dims.out, rng);
  g.ln_gain = make_bias(store, prefix + ".ln.gain", dims.out, 1.0);
  g.ln_bias = make_bias(store, prefix + ".ln.bias", dims.out, 0.0);
  return g;
}

Var Grn::forward(const Var& a, const Var* context) const {
  if (a.cols() != dims.in) {
    throw DimensionError("GRN expects width " + std::to_string(dims.in) + ", got " +
                         nn::shape_string(a.shape()));
  }
  Var pre = nn::linear(a, w2, b2);
  if (context && w3) {
    const Var ctx = nn::matmul(*context, *w3);
    pre = ctx.rows() == 1 ? nn::add_row(pre, ctx) : nn::add(pre, ctx);
  }
  const Var eta2 = nn::elu(pre);
  const Var eta1 = nn::linear(eta2, w1, b1);
  const Var residual = skip ? nn::matmul(a, *skip) : a;
  return nn::layer_norm(nn::add(residual, glu.forward(eta1)), ln_gain, ln_bias);
}

Vsn Vsn::create(ParameterStore& store, const std::string& prefix, std::size_t streams,
                std::size_t width, std::size_t context_width, Rng& rng) {
  if (streams == 0) throw ConfigError(prefix + ": variable selection needs at least one stream");
  Vsn v;
  v.streams = streams;
  v.width = width;
  v.selector = Grn::create(store, prefix + ".select",
                           GrnDims{streams * width, width, streams, context_width}, rng);
  for (std::size_t j = 0; j < streams; ++j) {
    v.per_stream.push_back(Grn::create(store, prefix + ".stream" + std::to_string(j),
                                       GrnDims{width, width, width, 0}, rng));
  }
  return v;
}

Vsn::Output Vsn::forward(std::span<const Var> inputs, const Var* static_context) const {
  if (inputs.size() != streams) {
    throw DimensionError("VSN expects " + std::to_string(streams) + " streams, got " +
                         std::to_string(inputs.size()));
  }
  for (const auto& s : inputs) {
    if (s.cols() != width || s.rows() != inputs[0].rows()) {
      throw DimensionError("VSN stream shape " + nn::shape_string(s.shape()) + " vs width " +
                           std::to_string(width));
    }
  }
  const Var flat = nn::concat_cols(inputs);
  const Var weights = nn::softmax(selector.forward(flat, static_context), 1);
  Var fused;
  for (std::size_t j = 0; j < streams; ++j) {
    const Var processed = per_stream[j].forward(inputs[j]);
    const Var term = nn::scale_rows(processed, nn::slice_cols(weights, j, 1));
    fused = fused.valid() ? nn::add(fused, term) : term;
  }
  return {fused, weights};
}

MultiHeadAttention MultiHeadAttention::create(ParameterStore& store, const std::string& prefix,
                                              std::size_t d_model, std::size_t heads,
                                              std::size_t d_attn, std::size_t d_val, Rng& rng) {
  if (heads == 0 || d_attn == 0 || d_val == 0) throw ConfigError(prefix + ": attention widths must be positive");
  MultiHeadAttention m;
  m.heads = heads;
  m.d_attn = d_attn;
  m.d_val = d_val;
  for (std::size_t h = 0; h < heads; ++h) {
    const std::string hp = prefix + ".head" + std::to_string(h);
    m.wq.push_back(make_weight(store, hp + ".wq", d_model, d_attn, rng));
    m.wk.push_back(make_weight(store, hp + ".wk", d_model, d_attn, rng));
    m.wv.push_back(make_weight(store, hp + ".wv", d_model, d_val, rng));
  }
  m.wh = make_weight(store, prefix + ".wh", heads * d_val, d_model, rng);
  return m;
}

Var MultiHeadAttention::forward(const Var& x, const std::vector<bool>& key_mask) const {
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d_attn));
  std::vector<Var> outputs;
  outputs.reserve(heads);
  for (std::size_t h = 0; h < heads; ++h) {
    const Var q = nn::matmul(x, wq[h]);
    const Var k = nn::matmul(x, wk[h]);
    const Var v = nn::matmul(x, wv[h]);
    const Var scores = nn::scale(nn::matmul(q, nn::transpose(k)), inv_sqrt);
    outputs.push_back(nn::matmul(nn::masked_softmax_rows(scores, key_mask), v));
  }
  const Var joined = heads == 1 ? outputs[0] : nn::concat_cols(outputs);
  return nn::matmul(joined, wh);
}

nn::Tensor positional_encoding(std::size_t rows, std::size_t width) {
  nn::Tensor pe({rows, width});
  for (std::size_t pos = 0; pos < rows; ++pos) {
    for (std::size_t i = 0; i < width; ++i) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(width));
      const double angle = static_cast<double>(pos) * rate;
      pe.at(pos, i) = i % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return pe;
}

}  // namespace vsnit::layers
