#include <doctest.h>

#include <cmath>

#include "hybridseq/embeddings.hpp"
#include "test_util.hpp"

using namespace hybridseq;
using namespace testutil;

TEST_SUITE_BEGIN("embeddings");

TEST_CASE("glorot_uniform stays inside the derived bound") {
  // sqrt(6 / 150) = 0.2
  auto m = embeddings::glorot_uniform(100, 50, 17);
  CHECK(m.rows() == 50);
  CHECK(m.cols() == 100);
  for (double v : m.data()) {
    CHECK(v >= -0.2);
    CHECK(v <= 0.2);
  }
  // sqrt(6 / 6) = 1.0
  auto m2 = embeddings::glorot_uniform(3, 3, 17);
  for (double v : m2.data()) {
    CHECK(v >= -1.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("glorot_uniform moments match the uniform distribution") {
  const std::size_t fan_in = 500, fan_out = 200;  // 1e5 samples
  auto m = embeddings::glorot_uniform(fan_in, fan_out, 23);
  const double b = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  double sum = 0;
  for (double v : m.data()) sum += v;
  const double n = static_cast<double>(m.size());
  const double mean = sum / n;
  const double sigma_mean = b / std::sqrt(3.0) / std::sqrt(n);
  CHECK(std::fabs(mean) <= 3.0 * sigma_mean);
  double ss = 0;
  for (double v : m.data()) ss += (v - mean) * (v - mean);
  const double variance = ss / n;
  const double expected = b * b / 3.0;
  CHECK(variance > 0.95 * expected);
  CHECK(variance < 1.05 * expected);
}

TEST_CASE("glorot_uniform is reproducible per seed and rejects zero dims") {
  auto a = embeddings::glorot_uniform(7, 5, 99);
  auto b = embeddings::glorot_uniform(7, 5, 99);
  CHECK(a == b);
  auto c = embeddings::glorot_uniform(7, 5, 100);
  CHECK(!(a == c));
  CHECK_THROWS_AS(embeddings::glorot_uniform(0, 5, 1), ConfigError);
}

TEST_CASE("static embedding loader builds the OOV row from the mean") {
  TempDir dir("emb_static");
  write_file(dir.file("e.txt"), "alpha 1 2 3\nbeta 3 4 5\n");
  auto t = embeddings::load_static_embeddings(dir.file("e.txt"));
  CHECK(t.matrix.rows() == 3);
  CHECK(t.dim() == 3);
  CHECK(t.matrix(t.oov_row, 0) == doctest::Approx(2.0));
  CHECK(t.matrix(t.oov_row, 1) == doctest::Approx(3.0));
  CHECK(t.matrix(t.oov_row, 2) == doctest::Approx(4.0));
}

TEST_CASE("static embedding loader names bad lines") {
  TempDir dir("emb_bad");
  write_file(dir.file("ragged.txt"), "alpha 1 2 3\nbeta 3 4\n");
  CHECK_THROWS_WITH_AS(embeddings::load_static_embeddings(dir.file("ragged.txt")),
                       doctest::Contains("line 2"), DataError);
  write_file(dir.file("nonnum.txt"), "alpha 1 x 3\n");
  CHECK_THROWS_WITH_AS(embeddings::load_static_embeddings(dir.file("nonnum.txt")),
                       doctest::Contains("line 1"), DataError);
}

TEST_CASE("static embeddings round-trip through the text format") {
  Rng rng(55);
  TempDir dir("emb_rt");
  for (int trial = 0; trial < 10; ++trial) {
    const int v = rng.uniform_int(1, 8), d = rng.uniform_int(1, 6);
    std::string content;
    for (int r = 0; r < v; ++r) {
      content += "word" + std::to_string(r);
      for (int c = 0; c < d; ++c) content += " " + fmt_double(rng.uniform(-2, 2), 17);
      content += "\n";
    }
    write_file(dir.file("e.txt"), content);
    auto t = embeddings::load_static_embeddings(dir.file("e.txt"));
    write_file(dir.file("e2.txt"), embeddings::static_embeddings_to_text(t));
    auto t2 = embeddings::load_static_embeddings(dir.file("e2.txt"));
    REQUIRE(t2.matrix.rows() == t.matrix.rows());
    for (std::size_t i = 0; i < t.matrix.data().size(); ++i)
      CHECK(t2.matrix.data()[i] == doctest::Approx(t.matrix.data()[i]).epsilon(1e-6));
  }
}

TEST_CASE("contextual store lookups are exact and missing keys are errors") {
  embeddings::ContextualEmbeddingStore store;
  store.dim = 4;
  for (int i = 0; i < 3; ++i) store.insert("doc1", i, {1.0 * i, 2, 3, 4});
  CHECK(store.lookup("doc1", 2)[0] == 2.0);
  CHECK_THROWS_WITH_AS(store.lookup("doc1", 3), doctest::Contains("doc1"), DataError);
  CHECK_THROWS_AS(store.lookup("nope", 0), DataError);
  CHECK_THROWS_AS(store.insert("doc1", 0, {9, 9, 9, 9}), DataError);   // duplicate key
  CHECK_THROWS_AS(store.insert("doc1", 9, {1, 2}), DataError);         // dimension mismatch
}

TEST_CASE("contextual stores round-trip through jsonl and binary bit-exactly") {
  Rng rng(66);
  TempDir dir("ctx_rt");
  embeddings::ContextualEmbeddingStore store;
  store.dim = 5;
  for (int doc = 0; doc < 4; ++doc)
    for (int i = 0; i < rng.uniform_int(1, 6); ++i) {
      Vec v;
      for (int c = 0; c < 5; ++c)
        v.push_back(static_cast<double>(static_cast<float>(rng.uniform(-3, 3))));
      store.insert("doc" + std::to_string(doc), i, v);
    }
  write_file(dir.file("s.jsonl"), embeddings::contextual_to_jsonl(store));
  auto sj = embeddings::load_contextual_store(dir.file("s.jsonl"));
  CHECK(sj.vectors == store.vectors);
  write_file(dir.file("s.bin"), embeddings::contextual_to_binary(store));
  auto sb = embeddings::load_contextual_store(dir.file("s.bin"));
  CHECK(sb.vectors == store.vectors);  // float32 payload: bit-equal
}

TEST_CASE("embed_sequence uses table rows and the OOV fallback") {
  TempDir dir("emb_seq");
  write_file(dir.file("e.txt"), "alpha 1 0\nbeta 0 1\n");
  auto table = embeddings::load_static_embeddings(dir.file("e.txt"));
  embeddings::EmbeddingSource src;
  src.kind = embeddings::SourceKind::kPretrainedStatic;
  src.table = &table;
  corpus::LabeledSequence seq{"d", {{"Alpha", {}}, {"beta", {}}, {"gamma", {}}}, {0, 0, 0}};
  auto x = embeddings::embed_sequence(seq, src);
  CHECK(x.rows() == 3);
  CHECK(x(0, 0) == 1.0);  // case-folded lookup
  CHECK(x(1, 1) == 1.0);
  CHECK(x(2, 0) == doctest::Approx(0.5));  // OOV row = mean
  CHECK(x(2, 1) == doctest::Approx(0.5));
}

TEST_CASE("embed_sequence returns stored contextual vectors exactly") {
  Rng rng(77);
  embeddings::ContextualEmbeddingStore store;
  store.dim = 3;
  corpus::LabeledSequence seq{"doc", {}, {}};
  for (int i = 0; i < 5; ++i) {
    seq.tokens.push_back({"t" + std::to_string(i), {}});
    seq.labels.push_back(0);
    store.insert("doc", i, {rng.uniform(), rng.uniform(), rng.uniform()});
  }
  embeddings::EmbeddingSource src;
  src.kind = embeddings::SourceKind::kPrecomputedContextual;
  src.store = &store;
  auto x = embeddings::embed_sequence(seq, src);
  for (int i = 0; i < 5; ++i)
    for (int c = 0; c < 3; ++c)
      CHECK(x(static_cast<std::size_t>(i), static_cast<std::size_t>(c)) ==
            store.lookup("doc", i)[static_cast<std::size_t>(c)]);

  seq.tokens.push_back({"t5", {}});
  seq.labels.push_back(0);
  CHECK_THROWS_AS(embeddings::embed_sequence(seq, src), DataError);  // missing vector
}

TEST_CASE("pseudo-contextual stores are deterministic and unit scale") {
  Rng rng(88);
  auto d = random_flat_dataset(rng, 4, 2);
  auto a = embeddings::make_pseudo_contextual_store(d, 8, 3);
  auto b = embeddings::make_pseudo_contextual_store(d, 8, 3);
  CHECK(a.vectors == b.vectors);
  for (const auto& [k, v] : a.vectors) {
    double norm = 0;
    for (double x : v) norm += x * x;
    CHECK(norm == doctest::Approx(1.0));
  }
}

TEST_SUITE_END();
