#pragma once

// Dense-branch inputs: trainable random tables, static pretrained tables, and
// precomputed contextual per-token vectors consumed from files. Contextual
// vectors are never computed here; any producer satisfying the file contract
// can fill the store, including the hash-based pseudo-contextual generator
// shipped for tests and synthetic experiments.

#include <cmath>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hybridseq/common.hpp"
#include "hybridseq/corpus.hpp"
#include "hybridseq/matrix.hpp"
#include "hybridseq/rng.hpp"

namespace hybridseq::embeddings {

using json = nlohmann::json;

// Entries i.i.d. uniform on [-b, b] with b = sqrt(6 / (fan_in + fan_out)).
inline Matrix glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
  if (fan_in == 0 || fan_out == 0) throw ConfigError("glorot_uniform: zero dimension");
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Matrix m(fan_out, fan_in);
  Rng rng(seed);
  for (double& v : m.data()) v = rng.uniform(-bound, bound);
  return m;
}

// ---------------------------------------------------------------------------
// static tables: "word v1 v2 ... vd" per line

struct StaticEmbeddingTable {
  std::unordered_map<std::string, int> vocab;  // case-folded word -> row
  Matrix matrix;                               // (V + 1) x d, last row = OOV
  bool trainable = false;
  int oov_row = 0;

  int dim() const { return static_cast<int>(matrix.cols()); }

  int row_for(const std::string& word) const {
    auto it = vocab.find(case_fold(word));
    return it == vocab.end() ? oov_row : it->second;
  }
};

inline StaticEmbeddingTable load_static_embeddings(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open embeddings: " + path);
  std::vector<std::pair<std::string, Vec>> rows;
  std::string line;
  int lineno = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    auto fields = split_ws(line);
    if (fields.size() < 2)
      throw DataError(path + " line " + std::to_string(lineno) + ": expected word and vector");
    Vec v;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      try {
        std::size_t used = 0;
        v.push_back(std::stod(fields[i], &used));
        if (used != fields[i].size()) throw std::invalid_argument(fields[i]);
      } catch (const std::exception&) {
        throw DataError(path + " line " + std::to_string(lineno) + ": non-numeric field '" +
                        fields[i] + "'");
      }
    }
    if (dim == 0)
      dim = v.size();
    else if (v.size() != dim)
      throw DataError(path + " line " + std::to_string(lineno) + ": dimension " +
                      std::to_string(v.size()) + " != " + std::to_string(dim));
    rows.emplace_back(fields[0], std::move(v));
  }
  if (rows.empty()) throw DataError(path + ": no embedding rows");

  StaticEmbeddingTable t;
  t.matrix = Matrix(rows.size() + 1, dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::string key = case_fold(rows[r].first);
    if (!t.vocab.count(key)) t.vocab.emplace(key, static_cast<int>(r));
    for (std::size_t c = 0; c < dim; ++c) t.matrix(r, c) = rows[r].second[c];
  }
  // OOV row = mean of all rows, keeping LSTM input statistics stable
  t.oov_row = static_cast<int>(rows.size());
  for (std::size_t c = 0; c < dim; ++c) {
    double sum = 0;
    for (std::size_t r = 0; r < rows.size(); ++r) sum += t.matrix(r, c);
    t.matrix(t.oov_row, c) = sum / static_cast<double>(rows.size());
  }
  if (!t.matrix.all_finite()) throw DataError(path + ": non-finite embedding values");
  return t;
}

inline std::string static_embeddings_to_text(const StaticEmbeddingTable& t) {
  // inverse of the vocab map, skipping the synthesized OOV row
  std::vector<std::string> words(t.matrix.rows());
  for (const auto& [w, r] : t.vocab) words[static_cast<std::size_t>(r)] = w;
  std::ostringstream out;
  for (std::size_t r = 0; r + 1 < t.matrix.rows(); ++r) {
    out << words[r];
    for (std::size_t c = 0; c < t.matrix.cols(); ++c) out << ' ' << fmt_double(t.matrix(r, c), 17);
    out << '\n';
  }
  return out.str();
}

// Freshly initialized trainable table over the dataset's token types.
inline StaticEmbeddingTable random_static_table(const corpus::Dataset& d, int dim,
                                                std::uint64_t seed) {
  std::vector<std::string> words;
  std::unordered_map<std::string, int> seen;
  for (const auto& s : d.sequences)
    for (const auto& tok : s.tokens) {
      std::string key = case_fold(tok.text);
      if (seen.emplace(key, static_cast<int>(words.size())).second) words.push_back(key);
    }
  if (words.empty()) throw DataError("random_static_table: empty dataset");
  StaticEmbeddingTable t;
  t.trainable = true;
  t.vocab = std::move(seen);
  t.matrix = glorot_uniform(static_cast<std::size_t>(dim), words.size() + 1, seed);
  t.oov_row = static_cast<int>(words.size());
  return t;
}

// ---------------------------------------------------------------------------
// contextual stores, keyed by (doc_id, token index)

struct ContextualEmbeddingStore {
  int dim = 0;
  std::map<std::pair<std::string, int>, Vec> vectors;

  const Vec& lookup(const std::string& doc_id, int index) const {
    auto it = vectors.find({doc_id, index});
    if (it == vectors.end())
      throw DataError("missing contextual vector for doc '" + doc_id + "' token " +
                      std::to_string(index));
    return it->second;
  }

  void insert(const std::string& doc_id, int index, Vec v) {
    if (dim == 0) dim = static_cast<int>(v.size());
    if (static_cast<int>(v.size()) != dim)
      throw DataError("contextual vector dimension mismatch for doc '" + doc_id + "'");
    if (!vectors.emplace(std::make_pair(doc_id, index), std::move(v)).second)
      throw DataError("duplicate contextual key: doc '" + doc_id + "' token " +
                      std::to_string(index));
  }
};

// JSONL: one {"doc_id", "index", "vec"} per line.
inline ContextualEmbeddingStore load_contextual_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open contextual store: " + path);
  ContextualEmbeddingStore store;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      store.insert(j.at("doc_id").get<std::string>(), j.at("index").get<int>(),
                   j.at("vec").get<Vec>());
    } catch (const json::exception& e) {
      throw DataError(path + " line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (store.vectors.empty()) throw DataError(path + ": empty contextual store");
  for (const auto& [k, v] : store.vectors)
    if (!all_finite(v)) throw DataError(path + ": non-finite vector for doc '" + k.first + "'");
  return store;
}

inline std::string contextual_to_jsonl(const ContextualEmbeddingStore& store) {
  std::ostringstream out;
  for (const auto& [key, vec] : store.vectors) {
    json j;
    j["doc_id"] = key.first;
    j["index"] = key.second;
    j["vec"] = vec;
    out << j.dump() << '\n';
  }
  return out.str();
}

// Binary: magic "CTXEMB1", u32 dim, then records of
// (u32 doc_id length, doc_id bytes, u32 token index, dim float32 values),
// all little-endian.
inline constexpr char kCtxMagic[] = "CTXEMB1";

inline void append_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint32_t read_u32(const std::string& s, std::size_t& off) {
  if (off + 4 > s.size()) throw DataError("truncated contextual store");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
  off += 4;
  return v;
}

inline std::string contextual_to_binary(const ContextualEmbeddingStore& store) {
  std::string out(kCtxMagic, 7);
  append_u32(out, static_cast<std::uint32_t>(store.dim));
  for (const auto& [key, vec] : store.vectors) {
    append_u32(out, static_cast<std::uint32_t>(key.first.size()));
    out += key.first;
    append_u32(out, static_cast<std::uint32_t>(key.second));
    for (double d : vec) {
      float f = static_cast<float>(d);
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      append_u32(out, bits);
    }
  }
  return out;
}

inline ContextualEmbeddingStore load_contextual_binary(const std::string& path) {
  std::string content = read_file(path);
  if (content.size() < 7 || content.compare(0, 7, kCtxMagic) != 0)
    throw DataError(path + ": missing CTXEMB1 magic");
  std::size_t off = 7;
  std::uint32_t dim = read_u32(content, off);
  ContextualEmbeddingStore store;
  while (off < content.size()) {
    std::uint32_t idlen = read_u32(content, off);
    if (off + idlen > content.size()) throw DataError(path + ": truncated record");
    std::string doc_id = content.substr(off, idlen);
    off += idlen;
    std::uint32_t index = read_u32(content, off);
    Vec v(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
      std::uint32_t bits = read_u32(content, off);
      float f;
      std::memcpy(&f, &bits, 4);
      v[i] = static_cast<double>(f);
    }
    store.insert(doc_id, static_cast<int>(index), std::move(v));
  }
  if (store.vectors.empty()) throw DataError(path + ": empty contextual store");
  return store;
}

inline ContextualEmbeddingStore load_contextual_store(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open contextual store: " + path);
  char head[7] = {0};
  probe.read(head, 7);
  if (probe.gcount() == 7 && std::memcmp(head, kCtxMagic, 7) == 0)
    return load_contextual_binary(path);
  return load_contextual_jsonl(path);
}

// ---------------------------------------------------------------------------
// embedding sources and sequence embedding

enum class SourceKind { kNone, kRandomStatic, kPretrainedStatic, kPrecomputedContextual };

struct EmbeddingSource {
  SourceKind kind = SourceKind::kNone;
  const StaticEmbeddingTable* table = nullptr;
  const ContextualEmbeddingStore* store = nullptr;

  int dim() const {
    switch (kind) {
      case SourceKind::kNone: return 0;
      case SourceKind::kPrecomputedContextual: return store->dim;
      default: return table->dim();
    }
  }
};

// Row i is the dense vector for token i: static lookup (case-folded, OOV row
// fallback) or contextual store lookup by (doc_id, i), which must succeed.
inline Matrix embed_sequence(const corpus::LabeledSequence& seq, const EmbeddingSource& src,
                             std::vector<int>* rows_used = nullptr) {
  if (src.kind == SourceKind::kNone) throw ConfigError("embed_sequence: source kind is none");
  if (src.kind == SourceKind::kPrecomputedContextual) {
    Matrix x(seq.size(), static_cast<std::size_t>(src.store->dim));
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const Vec& v = src.store->lookup(seq.doc_id, static_cast<int>(i));
      for (std::size_t c = 0; c < v.size(); ++c) x(i, c) = v[c];
    }
    return x;
  }
  const auto& table = *src.table;
  Matrix x(seq.size(), static_cast<std::size_t>(table.dim()));
  for (std::size_t i = 0; i < seq.size(); ++i) {
    int r = table.row_for(seq.tokens[i].text);
    if (rows_used) rows_used->push_back(r);
    auto row = table.matrix.row(static_cast<std::size_t>(r));
    for (std::size_t c = 0; c < row.size(); ++c) x(i, c) = row[c];
  }
  return x;
}

// ---------------------------------------------------------------------------
// pseudo-contextual producer: character-bigram hash vectors, unit-normalized,
// with optional additive noise past a token-index threshold. Deterministic in
// (token text, dim, seed); the noise stream is keyed by (doc_id, index).

inline Vec pseudo_embedding(const std::string& text, int dim, std::uint64_t seed) {
  Vec v(dim, 0.0);
  std::string padded = "^" + case_fold(text) + "$";
  for (std::size_t i = 0; i + 1 < padded.size(); ++i) {
    std::uint64_t h = splitmix64(fnv1a64(padded.substr(i, 2)) ^ seed);
    v[h % static_cast<std::uint64_t>(dim)] += (h >> 32) % 2 ? 1.0 : -1.0;
  }
  // coarse morphology: a double-weight component for the leading characters
  std::uint64_t ph = splitmix64(fnv1a64(padded.substr(0, 3)) ^ seed ^ 0x9e37u);
  v[ph % static_cast<std::uint64_t>(dim)] += (ph >> 32) % 2 ? 2.0 : -2.0;
  std::uint64_t wh = splitmix64(fnv1a64(padded) ^ seed);
  v[wh % static_cast<std::uint64_t>(dim)] += (wh >> 32) % 2 ? 1.0 : -1.0;
  double norm = 0;
  for (double x : v) norm += x * x;
  norm = std::sqrt(norm);
  if (norm > 0)
    for (double& x : v) x /= norm;
  return v;
}

inline ContextualEmbeddingStore make_pseudo_contextual_store(const corpus::Dataset& d, int dim,
                                                             std::uint64_t seed,
                                                             int noise_after = -1,
                                                             double noise_scale = 1.0) {
  ContextualEmbeddingStore store;
  store.dim = dim;
  for (const auto& seq : d.sequences) {
    for (std::size_t i = 0; i < seq.size(); ++i) {
      Vec v = pseudo_embedding(seq.tokens[i].text, dim, seed);
      if (noise_after >= 0 && static_cast<int>(i) > noise_after) {
        Rng noise(splitmix64(seed ^ fnv1a64(seq.doc_id) ^ (0x9e37ull * (i + 1))));
        for (double& x : v) x += noise_scale * noise.uniform(-1.0, 1.0);
      }
      store.insert(seq.doc_id, static_cast<int>(i), std::move(v));
    }
  }
  return store;
}

}  // namespace hybridseq::embeddings
