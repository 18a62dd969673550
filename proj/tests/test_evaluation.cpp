#include <doctest.h>

#include <cmath>

#include "hybridseq/evaluation.hpp"
#include "hybridseq/rng.hpp"

using namespace hybridseq;

TEST_SUITE_BEGIN("evaluation");

namespace {

const std::vector<std::string> kAB{"A", "B"};

std::vector<std::vector<int>> random_labels(Rng& rng, int n_seqs, int L,
                                            std::vector<std::vector<int>>* second = nullptr) {
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n_seqs; ++s) {
    std::vector<int> a, b;
    const int len = rng.uniform_int(1, 12);
    for (int t = 0; t < len; ++t) {
      a.push_back(rng.uniform_int(0, L - 1));
      b.push_back(rng.uniform_int(0, L - 1));
    }
    out.push_back(a);
    if (second) second->push_back(b);
  }
  return out;
}

}  // namespace

TEST_CASE("perfect predictions give macro-F1 of one") {
  std::vector<std::vector<int>> gold{{0, 1, 0}, {1, 1}};
  auto r = evaluation::token_macro_f1(gold, gold, kAB);
  CHECK(r.macro_f1 == 1.0);
  CHECK(r.per_label[0].support == 2);
  CHECK(r.per_label[1].support == 3);
}

TEST_CASE("hand-computed confusion for a degenerate predictor") {
  // gold AABB, pred AAAA: P(A)=0.5, R(A)=1, F1(A)=2/3; F1(B)=0; macro=1/3
  std::vector<std::vector<int>> gold{{0, 0, 1, 1}};
  std::vector<std::vector<int>> pred{{0, 0, 0, 0}};
  auto r = evaluation::token_macro_f1(gold, pred, kAB);
  CHECK(r.per_label[0].precision == 0.5);
  CHECK(r.per_label[0].recall == 1.0);
  CHECK(r.per_label[0].f1 == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(r.per_label[1].f1 == 0.0);
  CHECK(r.macro_f1 == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("token report equals a naive counting oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 40; ++trial) {
    const int L = rng.uniform_int(2, 5);
    std::vector<std::string> labels;
    for (int l = 0; l < L; ++l) labels.push_back("L" + std::to_string(l));
    std::vector<std::vector<int>> pred;
    auto gold = random_labels(rng, rng.uniform_int(1, 6), L, &pred);
    auto r = evaluation::token_macro_f1(gold, pred, labels);

    double macro = 0;
    long observed = 0;
    for (int l = 0; l < L; ++l) {
      long tp = 0, fp = 0, fn = 0, support = 0;
      for (std::size_t s = 0; s < gold.size(); ++s)
        for (std::size_t t = 0; t < gold[s].size(); ++t) {
          if (gold[s][t] == l) ++support;
          if (pred[s][t] == l && gold[s][t] == l) ++tp;
          if (pred[s][t] == l && gold[s][t] != l) ++fp;
          if (pred[s][t] != l && gold[s][t] == l) ++fn;
        }
      const double p = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
      const double rec = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
      const double f1 = p + rec > 0 ? 2 * p * rec / (p + rec) : 0.0;
      const auto& m = r.per_label[static_cast<std::size_t>(l)];
      CHECK(m.precision == p);
      CHECK(m.recall == rec);
      CHECK(m.f1 == f1);
      CHECK(m.support == support);
      if (support > 0 || tp + fp > 0) {  // observed labels only
        macro += f1;
        ++observed;
      }
    }
    CHECK(r.macro_f1 == macro / observed);
  }
}

TEST_CASE("macro-F1 is invariant to sequence order") {
  Rng rng(22);
  std::vector<std::vector<int>> pred;
  auto gold = random_labels(rng, 6, 3, &pred);
  std::vector<std::string> labels{"A", "B", "C"};
  auto r1 = evaluation::token_macro_f1(gold, pred, labels);
  std::vector<std::size_t> order{3, 0, 5, 1, 4, 2};
  std::vector<std::vector<int>> g2, p2;
  for (auto i : order) {
    g2.push_back(gold[i]);
    p2.push_back(pred[i]);
  }
  auto r2 = evaluation::token_macro_f1(g2, p2, labels);
  CHECK(r1.macro_f1 == r2.macro_f1);
}

TEST_CASE("exact chunk predictions score one") {
  std::vector<std::vector<corpus::Chunk>> gold{{{1, 4, 1}, {6, 7, 2}}};
  auto r = evaluation::approx_chunk_f1(gold, gold);
  CHECK(r.f1 == 1.0);
  CHECK(r.tp == 2);
}

TEST_CASE("partial overlap with the right label is a true positive") {
  std::vector<std::vector<corpus::Chunk>> gold{{{1, 4, 1}}};
  std::vector<std::vector<corpus::Chunk>> pred{{{2, 3, 1}}};
  auto r = evaluation::approx_chunk_f1(gold, pred);
  CHECK(r.tp == 1);
  CHECK(r.fp == 0);
  CHECK(r.fn == 0);
  // same span, wrong label: no credit
  std::vector<std::vector<corpus::Chunk>> wrong{{{2, 3, 2}}};
  auto r2 = evaluation::approx_chunk_f1(gold, wrong);
  CHECK(r2.tp == 0);
  CHECK(r2.fp == 1);
  CHECK(r2.fn == 1);
}

namespace {

// brute-force oracle applying the same one-credit greedy rule
evaluation::ChunkReport chunk_oracle(const std::vector<std::vector<corpus::Chunk>>& gold,
                                     const std::vector<std::vector<corpus::Chunk>>& pred) {
  evaluation::ChunkReport r;
  for (std::size_t s = 0; s < gold.size(); ++s) {
    auto g = gold[s];
    auto p = pred[s];
    std::sort(g.begin(), g.end(), [](auto& a, auto& b) { return a.start < b.start; });
    std::sort(p.begin(), p.end(), [](auto& a, auto& b) { return a.start < b.start; });
    std::vector<bool> used(g.size(), false);
    for (const auto& pc : p) {
      int hit = -1;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (used[i] || g[i].label != pc.label) continue;
        bool overlap = false;
        for (std::size_t a = pc.start; a < pc.end; ++a)
          for (std::size_t b = g[i].start; b < g[i].end; ++b) overlap = overlap || a == b;
        if (overlap) {
          hit = static_cast<int>(i);
          break;
        }
      }
      if (hit >= 0) {
        used[static_cast<std::size_t>(hit)] = true;
        ++r.tp;
      } else {
        ++r.fp;
      }
    }
    for (bool u : used) r.fn += u ? 0 : 1;
  }
  r.precision = r.tp + r.fp > 0 ? double(r.tp) / double(r.tp + r.fp) : 0.0;
  r.recall = r.tp + r.fn > 0 ? double(r.tp) / double(r.tp + r.fn) : 0.0;
  r.f1 = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  return r;
}

std::vector<corpus::Chunk> random_chunking(Rng& rng, std::size_t len, int n_labels) {
  std::vector<int> labels(len, 0);
  for (std::size_t t = 0; t < len; ++t) labels[t] = rng.uniform_int(0, n_labels - 1);
  return corpus::chunks_from_label_ids(labels, 0);
}

}  // namespace

TEST_CASE("approximate chunk matching equals the brute-force oracle") {
  Rng rng(23);
  for (int trial = 0; trial < 80; ++trial) {
    const int L = rng.uniform_int(2, 4);
    std::vector<std::vector<corpus::Chunk>> gold, pred;
    const int n = rng.uniform_int(1, 5);
    for (int s = 0; s < n; ++s) {
      const std::size_t len = static_cast<std::size_t>(rng.uniform_int(1, 14));
      gold.push_back(random_chunking(rng, len, L));
      pred.push_back(random_chunking(rng, len, L));
    }
    auto got = evaluation::approx_chunk_f1(gold, pred);
    auto want = chunk_oracle(gold, pred);
    CHECK(got.tp == want.tp);
    CHECK(got.fp == want.fp);
    CHECK(got.fn == want.fn);
    CHECK(got.f1 == want.f1);
  }
}

TEST_CASE("adding a correct exact-match prediction never lowers chunk F1") {
  Rng rng(24);
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<std::vector<corpus::Chunk>> gold{random_chunking(rng, 14, 3)};
    if (gold[0].empty()) continue;
    // predictions: a random subset of gold
    std::vector<std::vector<corpus::Chunk>> pred{{}};
    std::vector<corpus::Chunk> missing;
    for (const auto& c : gold[0]) {
      if (rng.bernoulli(0.5))
        pred[0].push_back(c);
      else
        missing.push_back(c);
    }
    if (missing.empty()) continue;
    const double before = evaluation::approx_chunk_f1(gold, pred).f1;
    pred[0].push_back(missing[0]);
    const double after = evaluation::approx_chunk_f1(gold, pred).f1;
    CHECK(after >= before - 1e-12);
  }
}

TEST_CASE("overlapping chunks within one side are rejected") {
  std::vector<std::vector<corpus::Chunk>> bad{{{0, 3, 1}, {2, 5, 1}}};
  std::vector<std::vector<corpus::Chunk>> ok{{{0, 3, 1}}};
  CHECK_THROWS_AS(evaluation::approx_chunk_f1(bad, ok), DataError);
  CHECK_THROWS_AS(evaluation::approx_chunk_f1(ok, bad), DataError);
}

TEST_CASE("a single bucket covering everything reduces to token macro-F1") {
  Rng rng(25);
  std::vector<std::vector<int>> pred;
  auto gold = random_labels(rng, 5, 3, &pred);
  std::vector<std::string> labels{"A", "B", "C"};
  auto bucket = evaluation::position_bucket_f1(gold, pred, {0, 100}, labels);
  REQUIRE(bucket.macro_f1.size() == 1);
  CHECK(*bucket.macro_f1[0] == evaluation::token_macro_f1(gold, pred, labels).macro_f1);
  long total = 0;
  for (const auto& g : gold) total += static_cast<long>(g.size());
  CHECK(bucket.token_counts[0] == total);
}

TEST_CASE("perfect predictions fill every nonempty bucket with one") {
  std::vector<std::vector<int>> gold{{0, 1, 0, 1, 1, 0, 1}};
  auto bucket = evaluation::position_bucket_f1(gold, gold, {0, 3, 6, 9, 12}, kAB);
  CHECK(*bucket.macro_f1[0] == 1.0);
  CHECK(*bucket.macro_f1[1] == 1.0);
  CHECK(*bucket.macro_f1[2] == 1.0);
  CHECK(!bucket.macro_f1[3].has_value());  // empty bin is null, not zero
  CHECK(bucket.token_counts[3] == 0);
}

TEST_CASE("bucket values equal filtered recomputation") {
  Rng rng(26);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::vector<int>> pred;
    auto gold = random_labels(rng, 6, 2, &pred);
    std::size_t max_len = 0;
    for (const auto& g : gold) max_len = std::max(max_len, g.size());
    const std::size_t mid = 1 + max_len / 2;
    std::vector<std::size_t> edges{0, mid, max_len + 1};
    auto bucket = evaluation::position_bucket_f1(gold, pred, edges, kAB);
    for (int b = 0; b < 2; ++b) {
      std::vector<std::vector<int>> fg, fp;
      for (std::size_t s = 0; s < gold.size(); ++s) {
        std::vector<int> g_f, p_f;
        for (std::size_t t = 0; t < gold[s].size(); ++t) {
          const bool inside = b == 0 ? t < mid : t >= mid;
          if (inside) {
            g_f.push_back(gold[s][t]);
            p_f.push_back(pred[s][t]);
          }
        }
        fg.push_back(g_f);
        fp.push_back(p_f);
      }
      long count = 0;
      for (const auto& g : fg) count += static_cast<long>(g.size());
      if (count == 0) {
        CHECK(!bucket.macro_f1[static_cast<std::size_t>(b)].has_value());
      } else {
        CHECK(*bucket.macro_f1[static_cast<std::size_t>(b)] ==
              evaluation::token_macro_f1(fg, fp, kAB).macro_f1);
      }
    }
  }
}

TEST_CASE("label improvements follow the relative formula") {
  evaluation::TokenReport base, combined;
  base.labels = combined.labels = {"Other", "Prevents"};
  base.per_label = {{0, 0, 0.9, 10}, {0, 0, 0.202, 5}};
  combined.per_label = {{0, 0, 0.93, 10}, {0, 0, 0.411, 5}};
  auto imp = evaluation::label_improvement(combined, base);
  REQUIRE(imp.size() == 2);
  CHECK(*imp[0].second == doctest::Approx((0.93 - 0.9) / 0.9).epsilon(1e-12));
  CHECK(*imp[1].second == doctest::Approx(1.0346534653465347).epsilon(1e-12));  // +103.5%
}

TEST_CASE("equal reports improve by zero; zero-base labels are null") {
  evaluation::TokenReport base;
  base.labels = {"A", "B"};
  base.per_label = {{0, 0, 0.5, 3}, {0, 0, 0.0, 2}};
  auto self = evaluation::label_improvement(base, base);
  CHECK(*self[0].second == 0.0);
  CHECK(!self[1].second.has_value());  // printed as the em-dash sentinel
  evaluation::TokenReport other;
  other.labels = {"A"};
  other.per_label = {{0, 0, 0.5, 3}};
  CHECK_THROWS_AS(evaluation::label_improvement(base, other), DataError);
}

TEST_CASE("welch on identical samples is t=0, p=1") {
  std::vector<double> a{0.8, 0.8, 0.8};
  auto r = evaluation::welch_t_test(a, a);
  CHECK(r.t_statistic == 0.0);
  CHECK(r.p_value == 1.0);
}

TEST_CASE("welch separates well-separated jittered samples") {
  std::vector<double> a{0.9 + 1e-5, 0.9 - 1e-5, 0.9};
  std::vector<double> b{0.5 - 1e-5, 0.5 + 1e-5, 0.5};
  auto r = evaluation::welch_t_test(a, b);
  CHECK(r.p_value < 0.001);
  CHECK(r.t_statistic > 0);
}

namespace {

// numeric-integration oracle for the two-sided t-tail: adaptive Simpson over
// a finite head plus a 1/x-substituted integral for the exact infinite tail
double t_pdf(double x, double df) {
  return std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
         std::sqrt(df * M_PI) * std::pow(1 + x * x / df, -(df + 1) / 2);
}

template <typename F>
double simpson(const F& f, double a, double b, int depth, double tol) {
  const double m = (a + b) / 2;
  const double coarse = (b - a) / 6 * (f(a) + 4 * f(m) + f(b));
  const double lm = (a + m) / 2, rm = (m + b) / 2;
  const double fine =
      (b - a) / 12 * (f(a) + 4 * f(lm) + 2 * f(m) + 4 * f(rm) + f(b));
  if (depth <= 0 || std::fabs(fine - coarse) < tol) return fine;
  return simpson(f, a, m, depth - 1, tol / 2) + simpson(f, m, b, depth - 1, tol / 2);
}

double p_oracle(double t, double df) {
  const double at = std::fabs(t);
  auto pdf = [df](double x) { return t_pdf(x, df); };
  const double cut = std::max(2.0 * at, at + 10.0);
  const double head = simpson(pdf, at, cut, 48, 1e-14);
  // tail via x = 1/s: integral over s in (0, 1/cut] of pdf(1/s) / s^2
  auto transformed = [df](double s) {
    if (s <= 0) return 0.0;
    return t_pdf(1.0 / s, df) / (s * s);
  };
  const double tail = simpson(transformed, 1e-18, 1.0 / cut, 48, 1e-14);
  return 2.0 * (head + tail);
}

}  // namespace

TEST_CASE("welch p-values match a numeric integration oracle") {
  Rng rng(27);
  for (int trial = 0; trial < 25; ++trial) {
    const int na = rng.uniform_int(2, 6), nb = rng.uniform_int(2, 6);
    std::vector<double> a, b;
    for (int i = 0; i < na; ++i) a.push_back(rng.uniform(0, 1));
    for (int i = 0; i < nb; ++i) b.push_back(rng.uniform(0, 1));
    auto r = evaluation::welch_t_test(a, b);
    if (!std::isfinite(r.t_statistic) || r.t_statistic == 0.0) continue;
    if (std::fabs(r.t_statistic) > 30) continue;  // oracle integration range
    CHECK(std::fabs(r.p_value - p_oracle(r.t_statistic, r.df)) <= 1e-10);
  }
}

TEST_CASE("potential summaries aggregate by source and label") {
  std::vector<evaluation::PotentialRow> rows;
  rows.push_back({"d", 0, "A", 3.0, 1.0, 2.0});
  rows.push_back({"d", 0, "B", 0.0, -1.0, 1.0});
  rows.push_back({"d", 1, "A", 5.0, 3.0, 2.0});
  auto s = evaluation::potential_summary(rows);
  CHECK(s.mean_lstm == doctest::Approx(1.0));
  CHECK(s.mean_hb == doctest::Approx(5.0 / 3.0));
  CHECK(s.max_lstm == 3.0);
  CHECK(s.max_hb == 2.0);
  REQUIRE(s.labels.size() == 2);
  CHECK(s.labels[0] == "A");
  CHECK(s.label_mean_lstm[0] == doctest::Approx(2.0));
  CHECK(s.label_mean_hb[1] == doctest::Approx(1.0));
  CHECK_THROWS_AS(evaluation::potential_summary({}), DataError);
}

TEST_CASE("constant dumps have the constant as mean") {
  std::vector<evaluation::PotentialRow> rows;
  for (int i = 0; i < 10; ++i) rows.push_back({"d", static_cast<std::size_t>(i), "A", 0, 2.5, 0});
  auto s = evaluation::potential_summary(rows);
  CHECK(s.mean_lstm == 2.5);
  CHECK(s.mean_hb == 0.0);
}

TEST_SUITE_END();
