#pragma once

// Label aggregation over redundant noisy annotations: Dawid-Skene-style EM
// with majority-vote initialization and add-one smoothing, plus agreement
// statistics (raw fraction and Cohen's kappa).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hybridseq/common.hpp"
#include "hybridseq/matrix.hpp"

namespace hybridseq::crowd {

struct AnnotationMatrix {
  std::vector<std::string> items;
  std::vector<std::string> annotators;
  // responses[i] lists (annotator index, label id) for item i
  std::vector<std::vector<std::pair<int, int>>> responses;

  void validate(int label_count) const {
    if (items.size() != responses.size()) throw DataError("annotation matrix shape mismatch");
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (responses[i].empty())
        throw DataError("item with zero responses: " + items[i]);
      for (const auto& [a, l] : responses[i]) {
        if (a < 0 || a >= static_cast<int>(annotators.size()))
          throw DataError("annotator index out of range for item " + items[i]);
        if (l < 0 || l >= label_count)
          throw DataError("label id out of range for item " + items[i]);
      }
    }
  }
};

struct AggregationResult {
  std::vector<Vec> posteriors;      // item -> distribution over labels
  std::vector<Matrix> confusions;   // annotator -> L x L row-stochastic
  Vec class_priors;
  int iterations = 0;
  bool converged = false;
  std::vector<double> log_likelihood_trace;  // observed-data LL per iteration
  std::vector<double> objective_trace;       // LL + smoothing log-prior
};

// EM essentially as in the classical latent-truth model: initialize posteriors
// by per-item majority vote (ties split uniformly), then alternate an M-step
// with add-one smoothing and an E-step until the largest posterior change
// drops below tol.
//
// Add-one smoothing makes the M-step a MAP update under a Dirichlet(2) prior,
// so the quantity EM provably never decreases is the penalized objective
// (observed-data log-likelihood plus the log-prior of the parameters); that is
// what gets asserted every iteration (1e-9 slack). The raw observed-data
// log-likelihood is traced alongside it; with redundant annotations the
// smoothing term is negligible and the raw trace is monotone as well.
inline AggregationResult dawid_skene_em(const AnnotationMatrix& m, int label_count,
                                        int max_iters = 100, double tol = 1e-7) {
  if (label_count < 2) throw ConfigError("dawid_skene_em: need at least 2 labels");
  if (max_iters < 1) throw ConfigError("dawid_skene_em: max_iters must be >= 1");
  m.validate(label_count);
  const std::size_t n_items = m.items.size();
  const std::size_t n_annot = m.annotators.size();
  const std::size_t L = static_cast<std::size_t>(label_count);

  AggregationResult r;
  r.posteriors.assign(n_items, Vec(L, 0.0));
  for (std::size_t i = 0; i < n_items; ++i) {
    std::vector<int> votes(L, 0);
    for (const auto& [a, l] : m.responses[i]) votes[static_cast<std::size_t>(l)]++;
    const int top = *std::max_element(votes.begin(), votes.end());
    int tied = 0;
    for (int v : votes) tied += v == top ? 1 : 0;
    for (std::size_t l = 0; l < L; ++l)
      r.posteriors[i][l] = votes[l] == top ? 1.0 / static_cast<double>(tied) : 0.0;
  }

  auto observed_ll = [&]() {
    double ll = 0;
    Vec logp(L);
    for (std::size_t i = 0; i < n_items; ++i) {
      for (std::size_t l = 0; l < L; ++l) logp[l] = std::log(r.class_priors[l]);
      for (const auto& [a, resp] : m.responses[i])
        for (std::size_t l = 0; l < L; ++l)
          logp[l] += std::log(r.confusions[static_cast<std::size_t>(a)](l,
                                                                        static_cast<std::size_t>(resp)));
      double mx = *std::max_element(logp.begin(), logp.end());
      double s = 0;
      for (double v : logp) s += std::exp(v - mx);
      ll += mx + std::log(s);
    }
    return ll;
  };

  // log-prior from the add-one smoothing (Dirichlet(2): one natural log per
  // parameter), without the constant normalizers
  auto smoothing_log_prior = [&]() {
    double lp = 0;
    for (std::size_t l = 0; l < L; ++l) lp += std::log(r.class_priors[l]);
    for (const auto& conf : r.confusions)
      for (double v : conf.data()) lp += std::log(v);
    return lp;
  };

  double prev_objective = -std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < max_iters; ++iter) {
    // M-step with add-one smoothing
    r.class_priors.assign(L, 0.0);
    for (std::size_t i = 0; i < n_items; ++i)
      for (std::size_t l = 0; l < L; ++l) r.class_priors[l] += r.posteriors[i][l];
    double prior_norm = static_cast<double>(n_items) + static_cast<double>(L);
    for (std::size_t l = 0; l < L; ++l) r.class_priors[l] = (r.class_priors[l] + 1.0) / prior_norm;

    r.confusions.assign(n_annot, Matrix(L, L));
    std::vector<Vec> denom(n_annot, Vec(L, 0.0));
    for (std::size_t i = 0; i < n_items; ++i)
      for (const auto& [a, resp] : m.responses[i])
        for (std::size_t l = 0; l < L; ++l) {
          r.confusions[static_cast<std::size_t>(a)](l, static_cast<std::size_t>(resp)) +=
              r.posteriors[i][l];
          denom[static_cast<std::size_t>(a)][l] += r.posteriors[i][l];
        }
    for (std::size_t a = 0; a < n_annot; ++a)
      for (std::size_t l = 0; l < L; ++l)
        for (std::size_t k = 0; k < L; ++k)
          r.confusions[a](l, k) =
              (r.confusions[a](l, k) + 1.0) / (denom[a][l] + static_cast<double>(L));

    // E-step
    double max_change = 0;
    Vec logp(L);
    for (std::size_t i = 0; i < n_items; ++i) {
      for (std::size_t l = 0; l < L; ++l) logp[l] = std::log(r.class_priors[l]);
      for (const auto& [a, resp] : m.responses[i])
        for (std::size_t l = 0; l < L; ++l)
          logp[l] += std::log(r.confusions[static_cast<std::size_t>(a)](l,
                                                                        static_cast<std::size_t>(resp)));
      double mx = *std::max_element(logp.begin(), logp.end());
      double s = 0;
      for (std::size_t l = 0; l < L; ++l) s += std::exp(logp[l] - mx);
      for (std::size_t l = 0; l < L; ++l) {
        double q = std::exp(logp[l] - mx) / s;
        max_change = std::max(max_change, std::fabs(q - r.posteriors[i][l]));
        r.posteriors[i][l] = q;
      }
    }

    const double ll = observed_ll();
    const double objective = ll + smoothing_log_prior();
    if (objective + 1e-9 < prev_objective)
      throw NumericError("EM objective decreased: " + fmt_double(prev_objective, 17) + " -> " +
                         fmt_double(objective, 17));
    prev_objective = objective;
    r.log_likelihood_trace.push_back(ll);
    r.objective_trace.push_back(objective);
    r.iterations = iter + 1;
    if (max_change < tol) {
      r.converged = true;
      break;
    }
  }
  return r;
}

// argmax posterior, ties to the lower label id
inline std::vector<int> infer_hard_labels(const AggregationResult& r) {
  std::vector<int> out;
  out.reserve(r.posteriors.size());
  for (const auto& p : r.posteriors) {
    int best = 0;
    for (std::size_t l = 1; l < p.size(); ++l)
      if (p[l] > p[static_cast<std::size_t>(best)]) best = static_cast<int>(l);
    out.push_back(best);
  }
  return out;
}

struct Agreement {
  double raw = 0;
  std::optional<double> kappa;  // null when chance agreement is 1
};

// Cohen's kappa with marginal-product chance agreement.
inline Agreement agreement(const std::map<std::string, int>& a,
                           const std::map<std::string, int>& b) {
  if (a.size() != b.size()) throw DataError("agreement: item sets differ in size");
  int max_label = 0;
  for (const auto& [k, v] : a) max_label = std::max(max_label, v);
  for (const auto& [k, v] : b) max_label = std::max(max_label, v);
  const std::size_t L = static_cast<std::size_t>(max_label) + 1;
  Vec ma(L, 0.0), mb(L, 0.0);
  double agree = 0;
  double n = 0;
  for (const auto& [item, la] : a) {
    auto it = b.find(item);
    if (it == b.end()) throw DataError("agreement: item missing from second labeling: " + item);
    ma[static_cast<std::size_t>(la)] += 1;
    mb[static_cast<std::size_t>(it->second)] += 1;
    if (la == it->second) agree += 1;
    n += 1;
  }
  if (n == 0) throw DataError("agreement: empty item set");
  Agreement out;
  out.raw = agree / n;
  double pe = 0;
  for (std::size_t l = 0; l < L; ++l) pe += (ma[l] / n) * (mb[l] / n);
  if (pe >= 1.0)
    out.kappa = std::nullopt;
  else
    out.kappa = (out.raw - pe) / (1.0 - pe);
  return out;
}

// ---------------------------------------------------------------------------
// annotation CSV: header line, then item_id,annotator_id,label

struct ParsedAnnotations {
  AnnotationMatrix matrix;
  std::vector<std::string> label_names;  // id order
};

inline ParsedAnnotations parse_annotation_csv(const std::string& content) {
  ParsedAnnotations out;
  std::map<std::string, int> item_index, annot_index, label_index;
  auto lines = split_on(content, '\n');
  bool header_seen = false;
  int lineno = 0;
  for (const auto& raw : lines) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;  // first non-empty line is the header
      continue;
    }
    auto cols = split_on(line, ',');
    if (cols.size() != 3)
      throw DataError("annotation CSV line " + std::to_string(lineno) +
                      ": expected item_id,annotator_id,label");
    const std::string item = trim(cols[0]), annot = trim(cols[1]), label = trim(cols[2]);
    if (item.empty() || annot.empty() || label.empty())
      throw DataError("annotation CSV line " + std::to_string(lineno) + ": empty field");
    if (!item_index.count(item)) {
      item_index[item] = static_cast<int>(out.matrix.items.size());
      out.matrix.items.push_back(item);
      out.matrix.responses.emplace_back();
    }
    if (!annot_index.count(annot)) {
      annot_index[annot] = static_cast<int>(out.matrix.annotators.size());
      out.matrix.annotators.push_back(annot);
    }
    if (!label_index.count(label)) {
      label_index[label] = static_cast<int>(out.label_names.size());
      out.label_names.push_back(label);
    }
    out.matrix.responses[static_cast<std::size_t>(item_index[item])].emplace_back(
        annot_index[annot], label_index[label]);
  }
  if (out.matrix.items.empty()) throw DataError("annotation CSV has no records");
  return out;
}

}  // namespace hybridseq::crowd
