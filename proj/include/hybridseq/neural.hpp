#pragma once

// Differentiable encoder: unidirectional LSTM over dense embeddings, a dense
// compression layer with inverted dropout over sparse hand-built vectors, and
// column-wise fusion of the two branches. Forward passes keep the caches the
// exact backward passes need.

#include <cmath>
#include <optional>
#include <vector>

#include "hybridseq/common.hpp"
#include "hybridseq/featurizer.hpp"
#include "hybridseq/matrix.hpp"
#include "hybridseq/rng.hpp"

namespace hybridseq::neural {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Gate order in the stacked parameter blocks: input i, forget f, candidate g,
// output o.
struct LSTMParams {
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  Matrix W;  // 4H x d
  Matrix U;  // 4H x H
  Vec b;     // 4H

  void check() const {
    if (W.rows() != 4 * hidden_dim || W.cols() != input_dim || U.rows() != 4 * hidden_dim ||
        U.cols() != hidden_dim || b.size() != 4 * hidden_dim)
      throw ConfigError("LSTM parameter dimensions inconsistent");
  }
};

struct LSTMCache {
  std::size_t T = 0, d = 0, H = 0;
  Matrix x;       // T x d
  Matrix h;       // T x H
  Matrix c;       // T x H
  Matrix gates;   // T x 4H, post-nonlinearity (i, f, g, o)
};

struct LSTMGrads {
  Matrix w;  // 4H x d
  Matrix u;  // 4H x H
  Vec b;     // 4H
  Matrix x;  // T x d
};

// h_t = o ⊙ tanh(c_t), c_t = f ⊙ c_{t-1} + i ⊙ g, h_0 = c_0 = 0.
inline std::pair<Matrix, LSTMCache> lstm_forward(const Matrix& x, const LSTMParams& p) {
  p.check();
  if (x.cols() != p.input_dim) throw ConfigError("lstm_forward: input dimension mismatch");
  const std::size_t T = x.rows(), H = p.hidden_dim;
  LSTMCache cache;
  cache.T = T;
  cache.d = p.input_dim;
  cache.H = H;
  cache.x = x;
  cache.h = Matrix(T, H);
  cache.c = Matrix(T, H);
  cache.gates = Matrix(T, 4 * H);

  Vec h_prev(H, 0.0), c_prev(H, 0.0), a(4 * H);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t r = 0; r < 4 * H; ++r) {
      double acc = p.b[r];
      auto wrow = p.W.row(r);
      auto xrow = x.row(t);
      for (std::size_t c = 0; c < p.input_dim; ++c) acc += wrow[c] * xrow[c];
      auto urow = p.U.row(r);
      for (std::size_t c = 0; c < H; ++c) acc += urow[c] * h_prev[c];
      a[r] = acc;
    }
    for (std::size_t j = 0; j < H; ++j) {
      const double gi = sigmoid(a[j]);
      const double gf = sigmoid(a[H + j]);
      const double gg = std::tanh(a[2 * H + j]);
      const double go = sigmoid(a[3 * H + j]);
      const double ct = gf * c_prev[j] + gi * gg;
      const double ht = go * std::tanh(ct);
      cache.gates(t, j) = gi;
      cache.gates(t, H + j) = gf;
      cache.gates(t, 2 * H + j) = gg;
      cache.gates(t, 3 * H + j) = go;
      cache.c(t, j) = ct;
      cache.h(t, j) = ht;
    }
    for (std::size_t j = 0; j < H; ++j) {
      h_prev[j] = cache.h(t, j);
      c_prev[j] = cache.c(t, j);
    }
  }
  Matrix h = cache.h;
  return {std::move(h), std::move(cache)};
}

// Exact gradients of sum_t <grad_h[t], h_t> w.r.t. parameters and inputs.
inline LSTMGrads lstm_backward(const LSTMCache& cache, const Matrix& grad_h, const LSTMParams& p) {
  if (grad_h.rows() != cache.T || grad_h.cols() != cache.H)
    throw ConfigError("lstm_backward: grad_h shape mismatch");
  const std::size_t T = cache.T, H = cache.H, d = cache.d;
  LSTMGrads g;
  g.w = Matrix(4 * H, d);
  g.u = Matrix(4 * H, H);
  g.b.assign(4 * H, 0.0);
  g.x = Matrix(T, d);

  Vec dh_next(H, 0.0), dc_next(H, 0.0), da(4 * H);
  for (std::size_t t = T; t-- > 0;) {
    for (std::size_t j = 0; j < H; ++j) {
      const double gi = cache.gates(t, j);
      const double gf = cache.gates(t, H + j);
      const double gg = cache.gates(t, 2 * H + j);
      const double go = cache.gates(t, 3 * H + j);
      const double ct = cache.c(t, j);
      const double c_prev = t > 0 ? cache.c(t - 1, j) : 0.0;
      const double tc = std::tanh(ct);
      const double dh = grad_h(t, j) + dh_next[j];
      const double dc = dh * go * (1.0 - tc * tc) + dc_next[j];
      da[j] = dc * gg * gi * (1.0 - gi);                  // input gate
      da[H + j] = dc * c_prev * gf * (1.0 - gf);          // forget gate
      da[2 * H + j] = dc * gi * (1.0 - gg * gg);          // candidate
      da[3 * H + j] = dh * tc * go * (1.0 - go);          // output gate
      dc_next[j] = dc * gf;
    }
    for (std::size_t r = 0; r < 4 * H; ++r) {
      const double dar = da[r];
      g.b[r] += dar;
      auto wgrow = g.w.row(r);
      auto xrow = cache.x.row(t);
      for (std::size_t c = 0; c < d; ++c) wgrow[c] += dar * xrow[c];
      if (t > 0) {
        auto ugrow = g.u.row(r);
        auto hprev = cache.h.row(t - 1);
        for (std::size_t c = 0; c < H; ++c) ugrow[c] += dar * hprev[c];
      }
    }
    // dx_t = W^T da; dh_{t-1} = U^T da
    {
      auto xg = g.x.row(t);
      for (std::size_t c = 0; c < d; ++c) xg[c] = 0.0;
      dh_next.assign(H, 0.0);
      for (std::size_t r = 0; r < 4 * H; ++r) {
        const double dar = da[r];
        auto wrow = p.W.row(r);
        for (std::size_t c = 0; c < d; ++c) xg[c] += wrow[c] * dar;
        auto urow = p.U.row(r);
        for (std::size_t c = 0; c < H; ++c) dh_next[c] += urow[c] * dar;
      }
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// dense compression of sparse vectors

enum class Activation { kRelu, kTanh };

struct DenseLayerParams {
  std::size_t in_dim = 0;   // sparse feature dimension F
  std::size_t out_dim = 0;  // compressed dimension D
  Matrix W;                 // D x F
  Vec b;                    // D
  Activation activation = Activation::kRelu;

  void check() const {
    if (W.rows() != out_dim || W.cols() != in_dim || b.size() != out_dim)
      throw ConfigError("dense layer dimensions inconsistent");
  }
};

enum class DropoutMode { kTrain, kInference };

struct DropoutSpec {
  double rate = 0.0;
  DropoutMode mode = DropoutMode::kInference;

  void check() const {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must be in [0, 1)");
  }
};

struct DenseCache {
  featurizer::SparseFeatureVector input;
  Vec pre;        // W v + b
  Vec activated;  // activation(pre)
  Vec mask;       // inverted-dropout multipliers (1/(1-p) or 0); empty = identity
};

// activation(W v + b), then inverted dropout in train mode (kept units scaled
// by 1/(1-p)). W v sums exactly the columns at v.indices.
inline std::pair<Vec, DenseCache> dense_forward(const featurizer::SparseFeatureVector& v,
                                                const DenseLayerParams& p,
                                                const DropoutSpec& drop, Rng& rng) {
  p.check();
  drop.check();
  if (static_cast<std::size_t>(v.dimension) != p.in_dim)
    throw ConfigError("dense_forward: sparse dimension mismatch");
  DenseCache cache;
  cache.input = v;
  cache.pre = Vec(p.b);
  for (int idx : v.indices) {
    for (std::size_t r = 0; r < p.out_dim; ++r)
      cache.pre[r] += p.W(r, static_cast<std::size_t>(idx));
  }
  cache.activated.resize(p.out_dim);
  for (std::size_t r = 0; r < p.out_dim; ++r)
    cache.activated[r] = p.activation == Activation::kRelu ? std::max(0.0, cache.pre[r])
                                                           : std::tanh(cache.pre[r]);
  Vec out = cache.activated;
  if (drop.mode == DropoutMode::kTrain && drop.rate > 0.0) {
    cache.mask.resize(p.out_dim);
    const double keep_scale = 1.0 / (1.0 - drop.rate);
    for (std::size_t r = 0; r < p.out_dim; ++r) {
      cache.mask[r] = rng.uniform() < drop.rate ? 0.0 : keep_scale;
      out[r] *= cache.mask[r];
    }
  }
  return {std::move(out), std::move(cache)};
}

struct DenseGrads {
  Matrix w;  // D x F; nonzero only at columns in the input indices
  Vec b;     // D
};

inline void dense_backward_accum(const DenseCache& cache, std::span<const double> grad_out,
                                 const DenseLayerParams& p, Matrix& grad_w, Vec& grad_b) {
  if (grad_out.size() != p.out_dim) throw ConfigError("dense_backward: grad shape mismatch");
  Vec dpre(p.out_dim);
  for (std::size_t r = 0; r < p.out_dim; ++r) {
    double da = grad_out[r];
    if (!cache.mask.empty()) da *= cache.mask[r];
    if (p.activation == Activation::kRelu)
      dpre[r] = cache.pre[r] > 0.0 ? da : 0.0;
    else
      dpre[r] = da * (1.0 - cache.activated[r] * cache.activated[r]);
    grad_b[r] += dpre[r];
  }
  for (int idx : cache.input.indices)
    for (std::size_t r = 0; r < p.out_dim; ++r)
      grad_w(r, static_cast<std::size_t>(idx)) += dpre[r];
}

inline DenseGrads dense_backward(const DenseCache& cache, std::span<const double> grad_out,
                                 const DenseLayerParams& p) {
  DenseGrads g;
  g.w = Matrix(p.out_dim, p.in_dim);
  g.b.assign(p.out_dim, 0.0);
  dense_backward_accum(cache, grad_out, p, g.w, g.b);
  return g;
}

// ---------------------------------------------------------------------------
// fusion

struct EncoderOutput {
  Matrix fused;           // T x (H + D), or a single branch's width
  std::size_t split = 0;  // first hand-built column; 0 when the LSTM is absent
};

// Column-wise concatenation [LSTM dims | HB-dense dims].
inline EncoderOutput fuse(const std::optional<Matrix>& h, const std::optional<Matrix>& z) {
  if (!h && !z) throw ConfigError("fuse: both branches absent");
  if (h && z && h->rows() != z->rows()) throw ConfigError("fuse: sequence length mismatch");
  EncoderOutput out;
  if (!z) {
    out.fused = *h;
    out.split = h->cols();
    return out;
  }
  if (!h) {
    out.fused = *z;
    out.split = 0;
    return out;
  }
  const std::size_t T = h->rows(), H = h->cols(), D = z->cols();
  out.fused = Matrix(T, H + D);
  out.split = H;
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < H; ++c) out.fused(t, c) = (*h)(t, c);
    for (std::size_t c = 0; c < D; ++c) out.fused(t, H + c) = (*z)(t, c);
  }
  return out;
}

}  // namespace hybridseq::neural
