#pragma once

// Measurement: per-token macro-F1, approximate chunk-match F1, per-label
// relative improvements, position-bucketed F1, Welch's t-test over repeated
// runs, and summaries of decomposed potential scores.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hybridseq/common.hpp"
#include "hybridseq/corpus.hpp"

namespace hybridseq::evaluation {

struct PerLabelMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  long support = 0;
};

struct TokenReport {
  std::vector<std::string> labels;
  std::vector<PerLabelMetrics> per_label;
  double macro_f1 = 0;
};

// One-vs-rest P/R/F1 over the pooled token multiset; macro-F1 is the
// unweighted mean over the observed labels (present in gold or predictions,
// background included). Labels never observed on either side get a zero row
// in the report but do not dilute the macro average.
inline TokenReport token_macro_f1(const std::vector<std::vector<int>>& gold,
                                  const std::vector<std::vector<int>>& pred,
                                  const std::vector<std::string>& labels) {
  if (gold.size() != pred.size()) throw DataError("token_macro_f1: sequence count mismatch");
  const std::size_t L = labels.size();
  std::vector<long> tp(L, 0), fp(L, 0), fn(L, 0), support(L, 0);
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size())
      throw DataError("token_macro_f1: length mismatch in sequence " + std::to_string(s));
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      const int g = gold[s][t], p = pred[s][t];
      if (g < 0 || g >= static_cast<int>(L) || p < 0 || p >= static_cast<int>(L))
        throw DataError("token_macro_f1: label id out of range");
      ++support[static_cast<std::size_t>(g)];
      if (g == p)
        ++tp[static_cast<std::size_t>(g)];
      else {
        ++fp[static_cast<std::size_t>(p)];
        ++fn[static_cast<std::size_t>(g)];
      }
    }
  }
  TokenReport r;
  r.labels = labels;
  double macro_sum = 0;
  long observed = 0;
  for (std::size_t l = 0; l < L; ++l) {
    PerLabelMetrics m;
    m.support = support[l];
    m.precision = tp[l] + fp[l] > 0 ? static_cast<double>(tp[l]) / static_cast<double>(tp[l] + fp[l]) : 0.0;
    m.recall = tp[l] + fn[l] > 0 ? static_cast<double>(tp[l]) / static_cast<double>(tp[l] + fn[l]) : 0.0;
    m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall) : 0.0;
    if (support[l] > 0 || tp[l] + fp[l] > 0) {
      macro_sum += m.f1;
      ++observed;
    }
    r.per_label.push_back(m);
  }
  r.macro_f1 = observed > 0 ? macro_sum / static_cast<double>(observed) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// approximate chunk matching: a predicted chunk is a true positive iff it
// shares at least one token position with a same-label gold chunk; each gold
// chunk is creditable once, greedily in sequence order.

struct ChunkReport {
  long tp = 0, fp = 0, fn = 0;
  double precision = 0, recall = 0, f1 = 0;
};

inline void check_no_overlap(const std::vector<corpus::Chunk>& chunks, const char* side,
                             std::size_t seq_index) {
  for (std::size_t i = 0; i + 1 < chunks.size(); ++i) {
    if (chunks[i].end > chunks[i + 1].start || chunks[i].start >= chunks[i].end)
      throw DataError(std::string("overlapping ") + side + " chunks in sequence " +
                      std::to_string(seq_index));
  }
}

inline ChunkReport approx_chunk_f1(const std::vector<std::vector<corpus::Chunk>>& gold,
                                   const std::vector<std::vector<corpus::Chunk>>& pred) {
  if (gold.size() != pred.size()) throw DataError("approx_chunk_f1: sequence count mismatch");
  ChunkReport r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    auto g = gold[s];
    auto p = pred[s];
    std::sort(g.begin(), g.end(), [](auto& a, auto& b) { return a.start < b.start; });
    std::sort(p.begin(), p.end(), [](auto& a, auto& b) { return a.start < b.start; });
    check_no_overlap(g, "gold", s);
    check_no_overlap(p, "predicted", s);
    std::vector<bool> credited(g.size(), false);
    for (const auto& pc : p) {
      bool matched = false;
      for (std::size_t i = 0; i < g.size() && !matched; ++i) {
        if (credited[i] || g[i].label != pc.label) continue;
        const bool overlap = pc.start < g[i].end && g[i].start < pc.end;
        if (overlap) {
          credited[i] = true;
          matched = true;
        }
      }
      if (matched)
        ++r.tp;
      else
        ++r.fp;
    }
    for (bool c : credited)
      if (!c) ++r.fn;
  }
  r.precision = r.tp + r.fp > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2.0 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// position buckets

struct PositionBucketReport {
  std::vector<std::size_t> bin_edges;  // [e0, e1), [e1, e2), ...
  std::vector<std::optional<double>> macro_f1;  // null for empty bins
  std::vector<long> token_counts;
};

inline std::vector<std::size_t> default_bin_edges(std::size_t max_len, std::size_t width = 10) {
  std::vector<std::size_t> edges{0};
  while (edges.back() < max_len) edges.push_back(edges.back() + width);
  return edges;
}

// Tokens are assigned to bins by linear position; macro-F1 is recomputed
// independently within each bin.
inline PositionBucketReport position_bucket_f1(const std::vector<std::vector<int>>& gold,
                                               const std::vector<std::vector<int>>& pred,
                                               const std::vector<std::size_t>& bin_edges,
                                               const std::vector<std::string>& labels) {
  if (bin_edges.size() < 2) throw ConfigError("position_bucket_f1: need at least one bin");
  for (std::size_t i = 0; i + 1 < bin_edges.size(); ++i)
    if (bin_edges[i] >= bin_edges[i + 1])
      throw ConfigError("position_bucket_f1: bin edges must be increasing");
  if (gold.size() != pred.size()) throw DataError("position_bucket_f1: sequence count mismatch");
  const std::size_t bins = bin_edges.size() - 1;
  std::vector<std::vector<std::vector<int>>> bin_gold(bins), bin_pred(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    bin_gold[b].resize(gold.size());
    bin_pred[b].resize(gold.size());
  }
  for (std::size_t s = 0; s < gold.size(); ++s) {
    if (gold[s].size() != pred[s].size())
      throw DataError("position_bucket_f1: length mismatch in sequence " + std::to_string(s));
    for (std::size_t t = 0; t < gold[s].size(); ++t) {
      if (t < bin_edges.front() || t >= bin_edges.back())
        throw ConfigError("position_bucket_f1: token position " + std::to_string(t) +
                          " outside bin coverage");
      std::size_t b = 0;
      while (t >= bin_edges[b + 1]) ++b;
      bin_gold[b][s].push_back(gold[s][t]);
      bin_pred[b][s].push_back(pred[s][t]);
    }
  }
  PositionBucketReport r;
  r.bin_edges = bin_edges;
  for (std::size_t b = 0; b < bins; ++b) {
    long count = 0;
    for (const auto& v : bin_gold[b]) count += static_cast<long>(v.size());
    r.token_counts.push_back(count);
    if (count == 0) {
      r.macro_f1.push_back(std::nullopt);
    } else {
      r.macro_f1.push_back(token_macro_f1(bin_gold[b], bin_pred[b], labels).macro_f1);
    }
  }
  return r;
}

// ---------------------------------------------------------------------------
// per-label relative improvement over a base model; null when base F1 is 0
// (printed as the "—" sentinel).

inline std::vector<std::pair<std::string, std::optional<double>>> label_improvement(
    const TokenReport& combined, const TokenReport& base) {
  if (combined.labels != base.labels) throw DataError("label_improvement: label set mismatch");
  std::vector<std::pair<std::string, std::optional<double>>> out;
  for (std::size_t l = 0; l < combined.labels.size(); ++l) {
    const double b = base.per_label[l].f1;
    if (b == 0.0)
      out.emplace_back(combined.labels[l], std::nullopt);
    else
      out.emplace_back(combined.labels[l], (combined.per_label[l].f1 - b) / b);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Welch's t-test (two-sided), Welch–Satterthwaite degrees of freedom

struct SignificanceResult {
  double mean_a = 0, mean_b = 0;
  double t_statistic = 0;
  double p_value = 1;
  std::size_t n_a = 0, n_b = 0;
  double df = 0;
};

namespace detail {

// regularized incomplete beta via Lentz's continued fraction
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16, kFpMin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) <= kEps) break;
  }
  return h;
}

inline double betai(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double bt =
      std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
               b * std::log(1.0 - x));
  if (x < (a + 1.0) / (a + b + 2.0)) return bt * betacf(a, b, x) / a;
  return 1.0 - bt * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// P(|T_df| > |t|) for Student's t.
inline double t_two_sided_p(double t, double df) {
  if (!std::isfinite(t)) return 0.0;
  if (t == 0.0) return 1.0;
  return detail::betai(df / 2.0, 0.5, df / (df + t * t));
}

inline SignificanceResult welch_t_test(const std::vector<double>& a,
                                       const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2) throw ConfigError("welch_t_test: need >= 2 runs per side");
  SignificanceResult r;
  r.n_a = a.size();
  r.n_b = b.size();
  auto mean = [](const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto var = [&](const std::vector<double>& v, double m) {
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
  };
  r.mean_a = mean(a);
  r.mean_b = mean(b);
  const double va = var(a, r.mean_a), vb = var(b, r.mean_b);
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  const double se2 = va / na + vb / nb;
  if (se2 == 0.0) {
    // zero variance on both sides: p = 1 by convention when means agree
    r.t_statistic = r.mean_a == r.mean_b ? 0.0 : std::numeric_limits<double>::infinity();
    r.p_value = r.mean_a == r.mean_b ? 1.0 : 0.0;
    r.df = na + nb - 2.0;
    return r;
  }
  r.t_statistic = (r.mean_a - r.mean_b) / std::sqrt(se2);
  r.df = se2 * se2 /
         (va * va / (na * na * (na - 1.0)) + vb * vb / (nb * nb * (nb - 1.0)));
  r.p_value = t_two_sided_p(r.t_statistic, r.df);
  return r;
}

// ---------------------------------------------------------------------------
// potential-score summaries over decomposition dumps

struct PotentialRow {
  std::string doc_id;
  std::size_t token_index = 0;
  std::string label;
  double phi_total = 0, phi_lstm = 0, phi_hb = 0;
};

struct PotentialSummary {
  double mean_lstm = 0, mean_hb = 0;
  double max_lstm = 0, max_hb = 0;
  // per-label means feed the heatmap output
  std::vector<std::string> labels;
  std::vector<double> label_mean_lstm, label_mean_hb;
};

inline PotentialSummary potential_summary(const std::vector<PotentialRow>& rows) {
  if (rows.empty()) throw DataError("potential_summary: empty dump");
  PotentialSummary s;
  s.max_lstm = s.max_hb = -std::numeric_limits<double>::infinity();
  std::map<std::string, std::pair<double, long>> lstm_by_label, hb_by_label;
  double sum_lstm = 0, sum_hb = 0;
  for (const auto& r : rows) {
    sum_lstm += r.phi_lstm;
    sum_hb += r.phi_hb;
    s.max_lstm = std::max(s.max_lstm, r.phi_lstm);
    s.max_hb = std::max(s.max_hb, r.phi_hb);
    auto& a = lstm_by_label[r.label];
    a.first += r.phi_lstm;
    a.second += 1;
    auto& b = hb_by_label[r.label];
    b.first += r.phi_hb;
    b.second += 1;
  }
  const double n = static_cast<double>(rows.size());
  s.mean_lstm = sum_lstm / n;
  s.mean_hb = sum_hb / n;
  for (const auto& [label, acc] : lstm_by_label) {
    s.labels.push_back(label);
    s.label_mean_lstm.push_back(acc.first / static_cast<double>(acc.second));
    s.label_mean_hb.push_back(hb_by_label[label].first /
                              static_cast<double>(hb_by_label[label].second));
  }
  return s;
}

}  // namespace hybridseq::evaluation
