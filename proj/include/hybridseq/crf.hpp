#pragma once

// Linear-chain CRF head: projection of fused features to per-label potential
// scores, exact log-likelihood and gradients via forward-backward, Viterbi
// decoding, the softmax-decoder ablation, and the per-branch decomposition of
// potentials used for model introspection. All dynamic programming runs in
// float64 log space; ties break toward the lower label id everywhere.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "hybridseq/common.hpp"
#include "hybridseq/matrix.hpp"

namespace hybridseq::crf {

inline double logsumexp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

// T x L unary scores, the direct inputs to the CRF layer.
using PotentialMatrix = Matrix;

struct TransitionParams {
  Matrix A;   // L x L, score of label j following label i
  Vec start;  // L
  Vec stop;   // L

  explicit TransitionParams(std::size_t L = 0) : A(L, L), start(L, 0.0), stop(L, 0.0) {}

  std::size_t label_count() const { return start.size(); }
};

struct ProjectionParams {
  Matrix W;               // L x width
  Vec b;                  // L
  std::size_t split = 0;  // first hand-built column of the fused input

  std::size_t width() const { return W.cols(); }
  std::size_t label_count() const { return W.rows(); }
};

// scores[t] = W fused[t] + b
inline PotentialMatrix potentials(const Matrix& fused, const ProjectionParams& proj) {
  if (fused.cols() != proj.width()) throw ConfigError("potentials: width mismatch");
  const std::size_t T = fused.rows(), L = proj.label_count();
  PotentialMatrix phi(T, L);
  for (std::size_t t = 0; t < T; ++t) {
    Vec row = matvec(proj.W, fused.row(t));
    for (std::size_t l = 0; l < L; ++l) phi(t, l) = row[l] + proj.b[l];
  }
  return phi;
}

inline double path_score(const PotentialMatrix& phi, const TransitionParams& tau,
                         std::span<const int> path) {
  const std::size_t T = phi.rows();
  double s = tau.start[static_cast<std::size_t>(path[0])];
  for (std::size_t t = 0; t < T; ++t) {
    s += phi(t, static_cast<std::size_t>(path[t]));
    if (t > 0) s += tau.A(static_cast<std::size_t>(path[t - 1]), static_cast<std::size_t>(path[t]));
  }
  s += tau.stop[static_cast<std::size_t>(path[T - 1])];
  return s;
}

// log sum over all label paths of exp(path score), via the forward recursion.
inline double log_partition(const PotentialMatrix& phi, const TransitionParams& tau) {
  const std::size_t T = phi.rows(), L = phi.cols();
  if (T == 0) throw DataError("log_partition: empty sequence");
  Vec alpha(L), next(L), work(L);
  for (std::size_t j = 0; j < L; ++j) alpha[j] = tau.start[j] + phi(0, j);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t i = 0; i < L; ++i) work[i] = alpha[i] + tau.A(i, j);
      next[j] = logsumexp(work) + phi(t, j);
    }
    alpha = next;
  }
  for (std::size_t j = 0; j < L; ++j) work[j] = alpha[j] + tau.stop[j];
  return logsumexp(work);
}

struct Marginals {
  Matrix unary;                 // T x L, P(y_t = l)
  std::vector<Matrix> pairwise; // T-1 entries, L x L, P(y_{t-1}=i, y_t=j)
  double log_z = 0;
};

inline Marginals forward_backward(const PotentialMatrix& phi, const TransitionParams& tau) {
  const std::size_t T = phi.rows(), L = phi.cols();
  if (T == 0) throw DataError("forward_backward: empty sequence");
  Matrix alpha(T, L), beta(T, L);
  Vec work(L);
  for (std::size_t j = 0; j < L; ++j) alpha(0, j) = tau.start[j] + phi(0, j);
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t j = 0; j < L; ++j) {
      for (std::size_t i = 0; i < L; ++i) work[i] = alpha(t - 1, i) + tau.A(i, j);
      alpha(t, j) = logsumexp(work) + phi(t, j);
    }
  for (std::size_t j = 0; j < L; ++j) beta(T - 1, j) = tau.stop[j];
  for (std::size_t t = T - 1; t-- > 0;)
    for (std::size_t i = 0; i < L; ++i) {
      for (std::size_t j = 0; j < L; ++j)
        work[j] = tau.A(i, j) + phi(t + 1, j) + beta(t + 1, j);
      beta(t, i) = logsumexp(work);
    }
  Marginals m;
  for (std::size_t j = 0; j < L; ++j) work[j] = alpha(T - 1, j) + tau.stop[j];
  m.log_z = logsumexp(work);
  m.unary = Matrix(T, L);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t j = 0; j < L; ++j) m.unary(t, j) = std::exp(alpha(t, j) + beta(t, j) - m.log_z);
  m.pairwise.reserve(T > 0 ? T - 1 : 0);
  for (std::size_t t = 1; t < T; ++t) {
    Matrix pw(L, L);
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < L; ++j)
        pw(i, j) = std::exp(alpha(t - 1, i) + tau.A(i, j) + phi(t, j) + beta(t, j) - m.log_z);
    m.pairwise.push_back(std::move(pw));
  }
  return m;
}

struct CrfGrads {
  Matrix phi;  // T x L
  Matrix a;    // L x L
  Vec start;
  Vec stop;
};

// loss = log Z - gold path score; gradients are model marginals minus
// empirical counts.
inline std::pair<double, CrfGrads> nll_and_grad(const PotentialMatrix& phi,
                                                const TransitionParams& tau,
                                                std::span<const int> gold) {
  const std::size_t T = phi.rows(), L = phi.cols();
  if (gold.size() != T) throw DataError("nll_and_grad: gold path length mismatch");
  for (int y : gold)
    if (y < 0 || y >= static_cast<int>(L)) throw DataError("nll_and_grad: invalid gold label");
  Marginals m = forward_backward(phi, tau);
  const double loss = m.log_z - path_score(phi, tau, gold);

  CrfGrads g;
  g.phi = m.unary;
  for (std::size_t t = 0; t < T; ++t) g.phi(t, static_cast<std::size_t>(gold[t])) -= 1.0;
  g.a = Matrix(L, L);
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t i = 0; i < L; ++i)
      for (std::size_t j = 0; j < L; ++j) g.a(i, j) += m.pairwise[t - 1](i, j);
  for (std::size_t t = 1; t < T; ++t)
    g.a(static_cast<std::size_t>(gold[t - 1]), static_cast<std::size_t>(gold[t])) -= 1.0;
  g.start.assign(L, 0.0);
  g.stop.assign(L, 0.0);
  for (std::size_t j = 0; j < L; ++j) {
    g.start[j] = m.unary(0, j);
    g.stop[j] = m.unary(T - 1, j);
  }
  g.start[static_cast<std::size_t>(gold[0])] -= 1.0;
  g.stop[static_cast<std::size_t>(gold[T - 1])] -= 1.0;
  return {loss, std::move(g)};
}

struct DecodeResult {
  std::vector<int> path;
  double score = 0;
};

// Highest-scoring path; ties break toward the lower label id at each
// backtrack step (strict improvement while scanning ids in ascending order).
inline DecodeResult viterbi(const PotentialMatrix& phi, const TransitionParams& tau) {
  const std::size_t T = phi.rows(), L = phi.cols();
  if (T == 0) throw DataError("viterbi: empty sequence");
  Matrix score(T, L);
  std::vector<std::vector<int>> back(T, std::vector<int>(L, 0));
  for (std::size_t j = 0; j < L; ++j) score(0, j) = tau.start[j] + phi(0, j);
  for (std::size_t t = 1; t < T; ++t)
    for (std::size_t j = 0; j < L; ++j) {
      double best = -std::numeric_limits<double>::infinity();
      int best_i = 0;
      for (std::size_t i = 0; i < L; ++i) {
        double s = score(t - 1, i) + tau.A(i, j);
        if (s > best) {
          best = s;
          best_i = static_cast<int>(i);
        }
      }
      score(t, j) = best + phi(t, j);
      back[t][j] = best_i;
    }
  double best = -std::numeric_limits<double>::infinity();
  int best_j = 0;
  for (std::size_t j = 0; j < L; ++j) {
    double s = score(T - 1, j) + tau.stop[j];
    if (s > best) {
      best = s;
      best_j = static_cast<int>(j);
    }
  }
  DecodeResult r;
  r.path.assign(T, 0);
  r.path[T - 1] = best_j;
  for (std::size_t t = T - 1; t-- > 0;) r.path[t] = back[t + 1][static_cast<std::size_t>(r.path[t + 1])];
  r.score = path_score(phi, tau, r.path);
  return r;
}

// Per-token argmax, the softmax-decoder ablation. Ties to the lower id.
inline std::vector<int> softmax_decode(const PotentialMatrix& phi) {
  std::vector<int> out(phi.rows(), 0);
  for (std::size_t t = 0; t < phi.rows(); ++t) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < phi.cols(); ++l)
      if (phi(t, l) > best) {
        best = phi(t, l);
        out[t] = static_cast<int>(l);
      }
  }
  return out;
}

// Sequence NLL under independent per-token softmax; grad phi = p - onehot.
inline std::pair<double, Matrix> softmax_nll_and_grad(const PotentialMatrix& phi,
                                                      std::span<const int> gold) {
  const std::size_t T = phi.rows(), L = phi.cols();
  if (gold.size() != T) throw DataError("softmax_nll_and_grad: gold length mismatch");
  double loss = 0;
  Matrix grad(T, L);
  for (std::size_t t = 0; t < T; ++t) {
    const double lz = logsumexp(phi.row(t));
    loss += lz - phi(t, static_cast<std::size_t>(gold[t]));
    for (std::size_t l = 0; l < L; ++l) grad(t, l) = std::exp(phi(t, l) - lz);
    grad(t, static_cast<std::size_t>(gold[t])) -= 1.0;
  }
  return {loss, std::move(grad)};
}

struct DecomposedPotentials {
  Matrix lstm;  // T x L, contribution of the LSTM columns
  Matrix hb;    // T x L, contribution of the hand-built columns
};

// phi_lstm + phi_hb + b == potentials(fused, proj); requires both branches.
inline DecomposedPotentials decompose_potentials(const Matrix& fused,
                                                 const ProjectionParams& proj) {
  if (proj.split == 0 || proj.split >= proj.width())
    throw ConfigError("decompose_potentials: both branches must be present");
  if (fused.cols() != proj.width()) throw ConfigError("decompose_potentials: width mismatch");
  const std::size_t T = fused.rows(), L = proj.label_count();
  DecomposedPotentials out;
  out.lstm = Matrix(T, L);
  out.hb = Matrix(T, L);
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t l = 0; l < L; ++l) {
      double a = 0, b = 0;
      auto w = proj.W.row(l);
      auto f = fused.row(t);
      for (std::size_t c = 0; c < proj.split; ++c) a += w[c] * f[c];
      for (std::size_t c = proj.split; c < proj.width(); ++c) b += w[c] * f[c];
      out.lstm(t, l) = a;
      out.hb(t, l) = b;
    }
  return out;
}

}  // namespace hybridseq::crf
