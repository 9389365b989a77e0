#include "vsnit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vsnit/error.hpp"

namespace vsnit::nn {

namespace {

Var make_node(const char* op, Tensor value, std::vector<NodePtr> parents,
              std::function<void(Node&)> backward_fn) {
  if (!value.all_finite()) throw NumericError(std::string(op) + ": non-finite output");
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->requires_grad = grad_enabled() &&
                        std::any_of(parents.begin(), parents.end(),
                                    [](const NodePtr& p) { return p->requires_grad; });
  if (node->requires_grad) {
    node->parents = std::move(parents);
    node->backward = std::move(backward_fn);
  }
  return Var(std::move(node));
}

[[noreturn]] void mismatch(const char* op, const Var& a, const Var& b) {
  throw DimensionError(std::string(op) + ": shape mismatch " + shape_string(a.shape()) +
                       " vs " + shape_string(b.shape()));
}

bool wants(const NodePtr& n) { return n->requires_grad; }

}  // namespace

Var matmul(const Var& a, const Var& b) {
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) mismatch("matmul", a, b);
  Tensor out({n, m}, 0.0);
  const auto A = a.value().data();
  const auto B = b.value().data();
  auto C = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* brow = &B[p * m];
      double* crow = &C[i * m];
      for (std::size_t j = 0; j < m; ++j) crow[j] += av * brow[j];
    }
  }
  auto pa = a.node(), pb = b.node();
  return make_node("matmul", std::move(out), {pa, pb}, [pa, pb, n, k, m](Node& self) {
    const auto G = self.grad.data();
    if (wants(pa)) {
      const auto B = pb->value.data();
      auto GA = pa->ensure_grad().data();
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = &G[i * m];
        for (std::size_t p = 0; p < k; ++p) {
          const double* brow = &B[p * m];
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) acc += grow[j] * brow[j];
          GA[i * k + p] += acc;
        }
      }
    }
    if (wants(pb)) {
      const auto A = pa->value.data();
      auto GB = pb->ensure_grad().data();
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = &G[i * m];
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          if (av == 0.0) continue;
          double* gbrow = &GB[p * m];
          for (std::size_t j = 0; j < m; ++j) gbrow[j] += av * grow[j];
        }
      }
    }
  });
}

Var linear(const Var& x, const Var& w, const Var& b) { return add_row(matmul(x, w), b); }

Var linear(const Var& x, const Var& w) { return matmul(x, w); }

Var add(const Var& a, const Var& b) {
  if (a.value().size() != b.value().size() || a.cols() != b.cols()) mismatch("add", a, b);
  Tensor out = a.value();
  const auto B = b.value().data();
  auto O = out.data();
  for (std::size_t i = 0; i < O.size(); ++i) O[i] += B[i];
  auto pa = a.node(), pb = b.node();
  return make_node("add", std::move(out), {pa, pb}, [pa, pb](Node& self) {
    const auto G = self.grad.data();
    for (const auto& p : {pa, pb}) {
      if (!wants(p)) continue;
      auto GP = p->ensure_grad().data();
      for (std::size_t i = 0; i < G.size(); ++i) GP[i] += G[i];
    }
  });
}

Var add_row(const Var& x, const Var& row) {
  if (row.value().size() != x.cols()) mismatch("add_row", x, row);
  const std::size_t n = x.rows(), d = x.cols();
  Tensor out = x.value();
  const auto R = row.value().data();
  auto O = out.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) O[i * d + j] += R[j];
  auto px = x.node(), pr = row.node();
  return make_node("add_row", std::move(out), {px, pr}, [px, pr, n, d](Node& self) {
    const auto G = self.grad.data();
    if (wants(px)) {
      auto GX = px->ensure_grad().data();
      for (std::size_t i = 0; i < G.size(); ++i) GX[i] += G[i];
    }
    if (wants(pr)) {
      auto GR = pr->ensure_grad().data();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) GR[j] += G[i * d + j];
    }
  });
}

Var mul(const Var& a, const Var& b) {
  if (a.value().size() != b.value().size() || a.cols() != b.cols()) mismatch("mul", a, b);
  Tensor out = a.value();
  const auto B = b.value().data();
  auto O = out.data();
  for (std::size_t i = 0; i < O.size(); ++i) O[i] *= B[i];
  auto pa = a.node(), pb = b.node();
  return make_node("mul", std::move(out), {pa, pb}, [pa, pb](Node& self) {
    const auto G = self.grad.data();
    if (wants(pa)) {
      const auto B = pb->value.data();
      auto GA = pa->ensure_grad().data();
      for (std::size_t i = 0; i < G.size(); ++i) GA[i] += G[i] * B[i];
    }
    if (wants(pb)) {
      const auto A = pa->value.data();
      auto GB = pb->ensure_grad().data();
      for (std::size_t i = 0; i < G.size(); ++i) GB[i] += G[i] * A[i];
    }
  });
}

Var scale(const Var& x, double factor) {
  Tensor out = x.value();
  for (auto& v : out.data()) v *= factor;
  auto px = x.node();
  return make_node("scale", std::move(out), {px}, [px, factor](Node& self) {
    const auto G = self.grad.data();
    auto GX = px->ensure_grad().data();
    for (std::size_t i = 0; i < G.size(); ++i) GX[i] += factor * G[i];
  });
}

Var scale_rows(const Var& x, const Var& s) {
  if (s.cols() != 1 || s.rows() != x.rows()) mismatch("scale_rows", x, s);
  const std::size_t n = x.rows(), d = x.cols();
  Tensor out = x.value();
  const auto S = s.value().data();
  auto O = out.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) O[i * d + j] *= S[i];
  auto px = x.node(), ps = s.node();
  return make_node("scale_rows", std::move(out), {px, ps}, [px, ps, n, d](Node& self) {
    const auto G = self.grad.data();
    if (wants(px)) {
      const auto S = ps->value.data();
      auto GX = px->ensure_grad().data();
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) GX[i * d + j] += G[i * d + j] * S[i];
    }
    if (wants(ps)) {
      const auto X = px->value.data();
      auto GS = ps->ensure_grad().data();
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 0; j < d; ++j) acc += G[i * d + j] * X[i * d + j];
        GS[i] += acc;
      }
    }
  });
}

Var elu(const Var& x) {
  Tensor out = x.value();
  for (auto& v : out.data()) v = v > 0.0 ? v : kEluAlpha * std::expm1(v);
  auto px = x.node();
  return make_node("elu", std::move(out), {px}, [px](Node& self) {
    const auto G = self.grad.data();
    const auto X = px->value.data();
    const auto Y = self.value.data();
    auto GX = px->ensure_grad().data();
    for (std::size_t i = 0; i < G.size(); ++i)
      GX[i] += G[i] * (X[i] > 0.0 ? 1.0 : Y[i] + kEluAlpha);
  });
}

Var sigmoid(const Var& x) {
  Tensor out = x.value();
  for (auto& v : out.data()) {
    v = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
  }
  auto px = x.node();
  return make_node("sigmoid", std::move(out), {px}, [px](Node& self) {
    const auto G = self.grad.data();
    const auto Y = self.value.data();
    auto GX = px->ensure_grad().data();
    for (std::size_t i = 0; i < G.size(); ++i) GX[i] += G[i] * Y[i] * (1.0 - Y[i]);
  });
}

namespace {

// Softmax over groups of `len` entries spaced `stride` apart, starting at each
// offset in `starts`. Shared by both axes.
struct Lanes {
  std::size_t count, len, outer_stride, inner_stride;
  std::size_t index(std::size_t lane, std::size_t i) const {
    return lane * outer_stride + i * inner_stride;
  }
};

Lanes lanes_for(const Tensor& t, std::size_t axis) {
  const std::size_t rows = t.rows(), cols = t.cols();
  if (t.rank() > 2) throw DimensionError("softmax supports rank <= 2");
  if (t.rank() == 1) {
    if (axis != 0) throw DimensionError("softmax axis out of range");
    return {1, cols, 0, 1};
  }
  if (axis == 1) return {rows, cols, cols, 1};
  if (axis == 0) return {cols, rows, 1, cols};
  throw DimensionError("softmax axis out of range");
}

}  // namespace

Var softmax(const Var& x, std::size_t axis) {
  const Lanes lanes = lanes_for(x.value(), axis);
  Tensor out = x.value();
  auto O = out.data();
  for (std::size_t l = 0; l < lanes.count; ++l) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < lanes.len; ++i) mx = std::max(mx, O[lanes.index(l, i)]);
    double total = 0.0;
    for (std::size_t i = 0; i < lanes.len; ++i) {
      auto& v = O[lanes.index(l, i)];
      v = std::exp(v - mx);
      total += v;
    }
    for (std::size_t i = 0; i < lanes.len; ++i) O[lanes.index(l, i)] /= total;
  }
  auto px = x.node();
  return make_node("softmax", std::move(out), {px}, [px, lanes](Node& self) {
    const auto G = self.grad.data();
    const auto Y = self.value.data();
    auto GX = px->ensure_grad().data();
    for (std::size_t l = 0; l < lanes.count; ++l) {
      double dot = 0.0;
      for (std::size_t i = 0; i < lanes.len; ++i) {
        const auto idx = lanes.index(l, i);
        dot += G[idx] * Y[idx];
      }
      for (std::size_t i = 0; i < lanes.len; ++i) {
        const auto idx = lanes.index(l, i);
        GX[idx] += Y[idx] * (G[idx] - dot);
      }
    }
  });
}

Var masked_softmax_rows(const Var& x, const std::vector<bool>& key_mask) {
  const std::size_t n = x.rows(), d = x.cols();
  if (key_mask.size() != d) {
    throw DimensionError("masked_softmax_rows: mask width " + std::to_string(key_mask.size()) +
                         " vs " + shape_string(x.shape()));
  }
  Tensor out(x.shape(), 0.0);
  const auto X = x.value().data();
  auto O = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d; ++j)
      if (key_mask[j]) mx = std::max(mx, X[i * d + j]);
    if (!std::isfinite(mx)) continue;  // fully masked row stays zero
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      if (!key_mask[j]) continue;
      O[i * d + j] = std::exp(X[i * d + j] - mx);
      total += O[i * d + j];
    }
    for (std::size_t j = 0; j < d; ++j) O[i * d + j] /= total;
  }
  auto px = x.node();
  return make_node("masked_softmax_rows", std::move(out), {px}, [px, n, d](Node& self) {
    const auto G = self.grad.data();
    const auto Y = self.value.data();
    auto GX = px->ensure_grad().data();
    for (std::size_t i = 0; i < n; ++i) {
      double dot = 0.0;
      for (std::size_t j = 0; j < d; ++j) dot += G[i * d + j] * Y[i * d + j];
      for (std::size_t j = 0; j < d; ++j) GX[i * d + j] += Y[i * d + j] * (G[i * d + j] - dot);
    }
  });
}

Var log_softmax_rows(const Var& x) {
  const std::size_t n = x.rows(), d = x.cols();
  Tensor out = x.value();
  auto O = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d; ++j) mx = std::max(mx, O[i * d + j]);
    double total = 0.0;
    for (std::size_t j = 0; j < d; ++j) total += std::exp(O[i * d + j] - mx);
    const double lse = mx + std::log(total);
    for (std::size_t j = 0; j < d; ++j) O[i * d + j] -= lse;
  }
  auto px = x.node();
  return make_node("log_softmax_rows", std::move(out), {px}, [px, n, d](Node& self) {
    const auto G = self.grad.data();
    const auto Y = self.value.data();
    auto GX = px->ensure_grad().data();
    for (std::size_t i = 0; i < n; ++i) {
      double gsum = 0.0;
      for (std::size_t j = 0; j < d; ++j) gsum += G[i * d + j];
      for (std::size_t j = 0; j < d; ++j)
        GX[i * d + j] += G[i * d + j] - std::exp(Y[i * d + j]) * gsum;
    }
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& bias, double eps) {
  const std::size_t n = x.rows(), d = x.cols();
  if (gain.value().size() != d) mismatch("layer_norm", x, gain);
  if (bias.value().size() != d) mismatch("layer_norm", x, bias);
  Tensor out(x.shape(), 0.0);
  auto xhat = std::make_shared<std::vector<double>>(n * d);
  auto inv_std = std::make_shared<std::vector<double>>(n);
  const auto X = x.value().data();
  const auto Gn = gain.value().data();
  const auto Bs = bias.value().data();
  auto O = out.data();
  for (std::size_t i = 0; i < n; ++i) {
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += X[i * d + j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double c = X[i * d + j] - mean;
      var += c * c;
    }
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < d; ++j) {
      const double h = (X[i * d + j] - mean) * is;
      (*xhat)[i * d + j] = h;
      O[i * d + j] = h * Gn[j] + Bs[j];
    }
  }
  auto px = x.node(), pg = gain.node(), pb = bias.node();
  return make_node(
      "layer_norm", std::move(out), {px, pg, pb}, [px, pg, pb, n, d, xhat, inv_std](Node& self) {
        const auto G = self.grad.data();
        const auto& H = *xhat;
        if (wants(pg)) {
          auto GG = pg->ensure_grad().data();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) GG[j] += G[i * d + j] * H[i * d + j];
        }
        if (wants(pb)) {
          auto GB = pb->ensure_grad().data();
          for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) GB[j] += G[i * d + j];
        }
        if (wants(px)) {
          const auto Gn = pg->value.data();
          auto GX = px->ensure_grad().data();
          const double inv_d = 1.0 / static_cast<double>(d);
          for (std::size_t i = 0; i < n; ++i) {
            double sum_g = 0.0, sum_gh = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
              const double gh = G[i * d + j] * Gn[j];
              sum_g += gh;
              sum_gh += gh * H[i * d + j];
            }
            for (std::size_t j = 0; j < d; ++j) {
              const double gh = G[i * d + j] * Gn[j];
              GX[i * d + j] +=
                  (*inv_std)[i] * (gh - inv_d * sum_g - H[i * d + j] * inv_d * sum_gh);
            }
          }
        }
      });
}

Var embed_lookup(const Var& table, std::size_t index) {
  const std::size_t idx[] = {index};
  return embed_rows(table, idx);
}

Var embed_rows(const Var& table, std::span<const std::size_t> indices) {
  const std::size_t v = table.rows(), d = table.cols();
  for (auto idx : indices) {
    if (idx >= v) {
      throw IndexError("embedding index " + std::to_string(idx) + " out of range for table " +
                       shape_string(table.shape()));
    }
  }
  if (indices.empty()) throw DimensionError("embed_rows: no indices");
  Tensor out({indices.size(), d}, 0.0);
  const auto T = table.value().data();
  auto O = out.data();
  for (std::size_t r = 0; r < indices.size(); ++r)
    std::copy_n(&T[indices[r] * d], d, &O[r * d]);
  auto pt = table.node();
  std::vector<std::size_t> idx(indices.begin(), indices.end());
  return make_node("embed_rows", std::move(out), {pt}, [pt, idx = std::move(idx), d](Node& self) {
    const auto G = self.grad.data();
    auto GT = pt->ensure_grad().data();
    for (std::size_t r = 0; r < idx.size(); ++r)
      for (std::size_t j = 0; j < d; ++j) GT[idx[r] * d + j] += G[r * d + j];
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw DimensionError("concat_cols: no inputs");
  const std::size_t n = parts[0].rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const auto& p : parts) {
    if (p.rows() != n) mismatch("concat_cols", parts[0], p);
    widths.push_back(p.cols());
    total += p.cols();
  }
  Tensor out({n, total}, 0.0);
  auto O = out.data();
  std::size_t offset = 0;
  std::vector<NodePtr> parents;
  for (const auto& p : parts) {
    const auto P = p.value().data();
    const std::size_t w = p.cols();
    for (std::size_t i = 0; i < n; ++i) std::copy_n(&P[i * w], w, &O[i * total + offset]);
    offset += w;
    parents.push_back(p.node());
  }
  auto ps = parents;
  return make_node("concat_cols", std::move(out), std::move(parents),
                   [ps = std::move(ps), widths = std::move(widths), n, total](Node& self) {
                     const auto G = self.grad.data();
                     std::size_t offset = 0;
                     for (std::size_t k = 0; k < ps.size(); ++k) {
                       const std::size_t w = widths[k];
                       if (wants(ps[k])) {
                         auto GP = ps[k]->ensure_grad().data();
                         for (std::size_t i = 0; i < n; ++i)
                           for (std::size_t j = 0; j < w; ++j)
                             GP[i * w + j] += G[i * total + offset + j];
                       }
                       offset += w;
                     }
                   });
}

Var slice_rows(const Var& x, std::size_t begin, std::size_t count) {
  const std::size_t d = x.cols();
  if (count == 0 || begin + count > x.rows()) {
    throw IndexError("slice_rows [" + std::to_string(begin) + ", +" + std::to_string(count) +
                     ") out of range for " + shape_string(x.shape()));
  }
  const auto X = x.value().data();
  Tensor out({count, d}, std::vector<double>(X.begin() + begin * d, X.begin() + (begin + count) * d));
  auto px = x.node();
  return make_node("slice_rows", std::move(out), {px}, [px, begin, count, d](Node& self) {
    const auto G = self.grad.data();
    auto GX = px->ensure_grad().data();
    for (std::size_t i = 0; i < count * d; ++i) GX[begin * d + i] += G[i];
  });
}

Var slice_cols(const Var& x, std::size_t begin, std::size_t count) {
  const std::size_t n = x.rows(), d = x.cols();
  if (count == 0 || begin + count > d) {
    throw IndexError("slice_cols [" + std::to_string(begin) + ", +" + std::to_string(count) +
                     ") out of range for " + shape_string(x.shape()));
  }
  Tensor out({n, count}, 0.0);
  const auto X = x.value().data();
  auto O = out.data();
  for (std::size_t i = 0; i < n; ++i) std::copy_n(&X[i * d + begin], count, &O[i * count]);
  auto px = x.node();
  return make_node("slice_cols", std::move(out), {px}, [px, begin, count, n, d](Node& self) {
    const auto G = self.grad.data();
    auto GX = px->ensure_grad().data();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < count; ++j) GX[i * d + begin + j] += G[i * count + j];
  });
}

Var transpose(const Var& x) {
  const std::size_t n = x.rows(), d = x.cols();
  Tensor out({d, n}, 0.0);
  const auto X = x.value().data();
  auto O = out.data();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) O[j * n + i] = X[i * d + j];
  auto px = x.node();
  return make_node("transpose", std::move(out), {px}, [px, n, d](Node& self) {
    const auto G = self.grad.data();
    auto GX = px->ensure_grad().data();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) GX[i * d + j] += G[j * n + i];
  });
}

Var sum(const Var& x) {
  double total = 0.0;
  for (double v : x.value().data()) total += v;
  auto px = x.node();
  return make_node("sum", Tensor::scalar(total), {px}, [px](Node& self) {
    const double g = self.grad[0];
    for (auto& v : px->ensure_grad().data()) v += g;
  });
}

Var dropout(const Var& x, double rate, Rng& rng) {
  if (rate <= 0.0) return x;
  if (rate >= 1.0) throw ConfigError("dropout rate must be < 1");
  const double keep = 1.0 - rate;
  auto mask = std::make_shared<std::vector<double>>(x.value().size());
  for (auto& m : *mask) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
  Tensor out = x.value();
  auto O = out.data();
  for (std::size_t i = 0; i < O.size(); ++i) O[i] *= (*mask)[i];
  auto px = x.node();
  return make_node("dropout", std::move(out), {px}, [px, mask](Node& self) {
    const auto G = self.grad.data();
    auto GX = px->ensure_grad().data();
    for (std::size_t i = 0; i < G.size(); ++i) GX[i] += G[i] * (*mask)[i];
  });
}

}  // namespace vsnit::nn
