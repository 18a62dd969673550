#pragma once

// Assembly of the model family: embedding source -> LSTM, sparse features ->
// dense compression, fusion, projection, CRF or softmax decoding. Holds the
// parameters for whichever branches the variant enables, provides exact
// gradients for all of them, and persists checkpoints.
//
// Variants (by branch flags):
//   rand-LSTM-CRF     embedding=random_static,          use_lstm, no HB
//   HB-CRF            embedding=none, no LSTM, HB fed to the projection
//                     directly (no dense layer): a standard linear-chain CRF
//   ELMo-LSTM-CRF     embedding=precomputed_contextual, use_lstm, no HB
//   ELMo-LSTM-CRF-HB  both branches; HB goes through dense compression with
//                     dropout and is concatenated with the LSTM states
// Each admits a softmax decoder in place of the CRF.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hybridseq/common.hpp"
#include "hybridseq/corpus.hpp"
#include "hybridseq/crf.hpp"
#include "hybridseq/embeddings.hpp"
#include "hybridseq/featurizer.hpp"
#include "hybridseq/neural.hpp"

namespace hybridseq::model {

using json = nlohmann::json;

enum class Decoder { kCrf, kSoftmax };

struct VariantSpec {
  embeddings::SourceKind embedding = embeddings::SourceKind::kNone;
  bool use_hb = true;
  bool use_lstm = false;
  Decoder decoder = Decoder::kCrf;
  int emb_dim = 24;        // d; ignored for contextual/pretrained sources
  int hidden_dim = 32;     // H
  int compressed_dim = 64; // D
  bool dropout_lstm = false;  // also drop LSTM outputs at train time

  bool dense_branch() const { return embedding != embeddings::SourceKind::kNone; }
  // combined variants compress HB; HB alone feeds the projection directly
  bool hb_through_dense() const { return use_hb && use_lstm; }
  bool hb_direct() const { return use_hb && !hb_through_dense(); }

  void validate() const {
    if (use_lstm && !dense_branch())
      throw ConfigError("model variant: LSTM requires an embedding source");
    if (!use_hb && !dense_branch())
      throw ConfigError("model variant: no branch enabled");
    if (dense_branch() && !use_lstm)
      throw ConfigError("model variant: embedding source without LSTM is not supported");
    if (hidden_dim < 1 || compressed_dim < 1 || emb_dim < 1)
      throw ConfigError("model variant: dimensions must be >= 1");
  }
};

inline std::string source_kind_name(embeddings::SourceKind k) {
  switch (k) {
    case embeddings::SourceKind::kNone: return "none";
    case embeddings::SourceKind::kRandomStatic: return "random_static";
    case embeddings::SourceKind::kPretrainedStatic: return "pretrained_static";
    case embeddings::SourceKind::kPrecomputedContextual: return "precomputed_contextual";
  }
  return "none";
}

inline embeddings::SourceKind source_kind_from_name(const std::string& s) {
  if (s == "none") return embeddings::SourceKind::kNone;
  if (s == "random_static") return embeddings::SourceKind::kRandomStatic;
  if (s == "pretrained_static") return embeddings::SourceKind::kPretrainedStatic;
  if (s == "precomputed_contextual") return embeddings::SourceKind::kPrecomputedContextual;
  throw ConfigError("unknown embedding kind: " + s);
}

struct HybridModel {
  VariantSpec variant;
  std::vector<std::string> labels;
  corpus::LabelScheme scheme;
  int feature_dim = 0;  // F; 0 when HB disabled
  int input_dim = 0;    // d actually used by the LSTM

  embeddings::StaticEmbeddingTable emb_table;  // owned when random_static
  neural::LSTMParams lstm;
  neural::DenseLayerParams dense;
  crf::ProjectionParams proj;
  crf::TransitionParams trans{0};

  std::size_t label_count() const { return labels.size(); }
};

// External embedding artifacts a model variant may depend on at run time.
struct EncodingContext {
  const embeddings::StaticEmbeddingTable* pretrained = nullptr;
  const embeddings::ContextualEmbeddingStore* store = nullptr;
};

inline embeddings::EmbeddingSource embedding_source(const HybridModel& m,
                                                    const EncodingContext& ctx) {
  embeddings::EmbeddingSource src;
  src.kind = m.variant.embedding;
  switch (m.variant.embedding) {
    case embeddings::SourceKind::kNone:
      break;
    case embeddings::SourceKind::kRandomStatic:
      src.table = &m.emb_table;
      break;
    case embeddings::SourceKind::kPretrainedStatic:
      if (!ctx.pretrained) throw ConfigError("pretrained embedding table not provided");
      src.table = ctx.pretrained;
      break;
    case embeddings::SourceKind::kPrecomputedContextual:
      if (!ctx.store) throw ConfigError("contextual embedding store not provided");
      src.store = ctx.store;
      break;
  }
  return src;
}

// Initialize parameters: Glorot for weight matrices, zero biases, forget-gate
// bias +1. `train_data` is only consulted to build a random-static table.
inline HybridModel init_model(const VariantSpec& variant, const corpus::LabelScheme& scheme,
                              int feature_dim, const EncodingContext& ctx,
                              const corpus::Dataset* train_data, std::uint64_t seed) {
  variant.validate();
  HybridModel m;
  m.variant = variant;
  m.scheme = scheme;
  m.labels = scheme.labels;
  m.feature_dim = variant.use_hb ? feature_dim : 0;
  if (variant.use_hb && feature_dim <= 0) throw ConfigError("init_model: feature_dim required");
  const std::size_t L = m.labels.size();
  Rng rng(seed);

  int d = variant.emb_dim;
  if (variant.embedding == embeddings::SourceKind::kPretrainedStatic) {
    if (!ctx.pretrained) throw ConfigError("pretrained embedding table not provided");
    d = ctx.pretrained->dim();
  } else if (variant.embedding == embeddings::SourceKind::kPrecomputedContextual) {
    if (!ctx.store) throw ConfigError("contextual embedding store not provided");
    d = ctx.store->dim;
  } else if (variant.embedding == embeddings::SourceKind::kRandomStatic) {
    if (!train_data) throw ConfigError("random_static requires training data at init");
    m.emb_table = embeddings::random_static_table(*train_data, d, rng.child(1).next_u64());
  }
  m.input_dim = d;

  std::size_t width = 0;
  if (variant.use_lstm) {
    const std::size_t H = static_cast<std::size_t>(variant.hidden_dim);
    m.lstm.input_dim = static_cast<std::size_t>(d);
    m.lstm.hidden_dim = H;
    m.lstm.W = embeddings::glorot_uniform(static_cast<std::size_t>(d), 4 * H,
                                          rng.child(2).next_u64());
    m.lstm.U = embeddings::glorot_uniform(H, 4 * H, rng.child(3).next_u64());
    m.lstm.b.assign(4 * H, 0.0);
    for (std::size_t j = 0; j < H; ++j) m.lstm.b[H + j] = 1.0;  // forget gate
    width += H;
  }
  if (variant.hb_through_dense()) {
    const std::size_t D = static_cast<std::size_t>(variant.compressed_dim);
    m.dense.in_dim = static_cast<std::size_t>(feature_dim);
    m.dense.out_dim = D;
    m.dense.W = embeddings::glorot_uniform(static_cast<std::size_t>(feature_dim), D,
                                           rng.child(4).next_u64());
    m.dense.b.assign(D, 0.0);
    width += D;
  } else if (variant.hb_direct()) {
    width += static_cast<std::size_t>(feature_dim);
  }

  m.proj.W = embeddings::glorot_uniform(width, L, rng.child(5).next_u64());
  m.proj.b.assign(L, 0.0);
  m.proj.split = variant.use_lstm ? static_cast<std::size_t>(variant.hidden_dim) : 0;
  m.trans = crf::TransitionParams(L);
  return m;
}

// ---------------------------------------------------------------------------
// gradients, aligned with the model's enabled branches

struct ModelGrads {
  Matrix emb;
  Matrix lstm_w, lstm_u;
  Vec lstm_b;
  Matrix dense_w;
  Vec dense_b;
  Matrix proj_w;
  Vec proj_b;
  Matrix trans_a;
  Vec trans_start, trans_stop;

  static ModelGrads zeros_like(const HybridModel& m) {
    ModelGrads g;
    if (m.variant.embedding == embeddings::SourceKind::kRandomStatic)
      g.emb = Matrix(m.emb_table.matrix.rows(), m.emb_table.matrix.cols());
    if (m.variant.use_lstm) {
      g.lstm_w = Matrix(m.lstm.W.rows(), m.lstm.W.cols());
      g.lstm_u = Matrix(m.lstm.U.rows(), m.lstm.U.cols());
      g.lstm_b.assign(m.lstm.b.size(), 0.0);
    }
    if (m.variant.hb_through_dense()) {
      g.dense_w = Matrix(m.dense.W.rows(), m.dense.W.cols());
      g.dense_b.assign(m.dense.b.size(), 0.0);
    }
    g.proj_w = Matrix(m.proj.W.rows(), m.proj.W.cols());
    g.proj_b.assign(m.proj.b.size(), 0.0);
    const std::size_t L = m.label_count();
    g.trans_a = Matrix(L, L);
    g.trans_start.assign(L, 0.0);
    g.trans_stop.assign(L, 0.0);
    return g;
  }
};

struct ParamSlot {
  std::string name;
  std::span<double> value;
  std::span<double> grad;
  bool regularize = false;  // weight matrices yes, bias vectors no
};

// Canonical slot order; this is also the checkpoint block order.
inline std::vector<ParamSlot> bind_slots(HybridModel& m, ModelGrads& g) {
  std::vector<ParamSlot> slots;
  auto push = [&slots](const std::string& name, std::vector<double>& v, std::vector<double>& gv,
                       bool reg) {
    slots.push_back({name, std::span<double>(v), std::span<double>(gv), reg});
  };
  if (m.variant.embedding == embeddings::SourceKind::kRandomStatic)
    push("embedding", m.emb_table.matrix.data(), g.emb.data(), true);
  if (m.variant.use_lstm) {
    push("lstm_w", m.lstm.W.data(), g.lstm_w.data(), true);
    push("lstm_u", m.lstm.U.data(), g.lstm_u.data(), true);
    push("lstm_b", m.lstm.b, g.lstm_b, false);
  }
  if (m.variant.hb_through_dense()) {
    push("dense_w", m.dense.W.data(), g.dense_w.data(), true);
    push("dense_b", m.dense.b, g.dense_b, false);
  }
  push("proj_w", m.proj.W.data(), g.proj_w.data(), true);
  push("proj_b", m.proj.b, g.proj_b, false);
  push("trans_a", m.trans.A.data(), g.trans_a.data(), true);
  push("trans_start", m.trans.start, g.trans_start, false);
  push("trans_stop", m.trans.stop, g.trans_stop, false);
  return slots;
}

// ---------------------------------------------------------------------------
// per-sequence computation

struct SequenceInput {
  const corpus::LabeledSequence* seq = nullptr;
  std::vector<featurizer::SparseFeatureVector> feats;  // empty when HB disabled
};

inline SequenceInput prepare_input(const HybridModel& m, const corpus::LabeledSequence& seq,
                                   const featurizer::FeaturizerConfig* feat_cfg,
                                   const featurizer::FeatureVocabulary* vocab) {
  SequenceInput in;
  in.seq = &seq;
  if (m.variant.use_hb) {
    if (!feat_cfg || !vocab) throw ConfigError("HB variant requires featurizer artifacts");
    auto cache = featurizer::build_feature_cache(seq, *feat_cfg);
    for (std::size_t i = 0; i < seq.size(); ++i)
      in.feats.push_back(
          featurizer::vectorize(featurizer::featurize_token(seq, i, *feat_cfg, &cache), *vocab));
  }
  return in;
}

struct ForwardState {
  Matrix phi;                 // T x L potentials
  Matrix fused;               // empty for hb_direct models
  std::size_t split = 0;
  neural::LSTMCache lstm_cache;
  std::vector<neural::DenseCache> dense_caches;
  Matrix lstm_drop_mask;      // empty unless dropout_lstm was active
  std::vector<int> emb_rows;  // rows used, for trainable tables
};

// Potentials for one sequence. In train mode, dropout draws come from `rng`.
inline ForwardState forward_potentials(const HybridModel& m, const EncodingContext& ctx,
                                       const SequenceInput& in, neural::DropoutMode mode,
                                       double dropout_rate, Rng* rng) {
  const auto& seq = *in.seq;
  const std::size_t T = seq.size(), L = m.label_count();
  if (T == 0) throw DataError("empty sequence: " + seq.doc_id);
  ForwardState st;

  std::optional<Matrix> h;
  std::optional<Matrix> z;
  if (m.variant.use_lstm) {
    embeddings::EmbeddingSource src = embedding_source(m, ctx);
    Matrix x = embeddings::embed_sequence(seq, src, &st.emb_rows);
    auto [hh, cache] = neural::lstm_forward(x, m.lstm);
    st.lstm_cache = std::move(cache);
    if (m.variant.dropout_lstm && mode == neural::DropoutMode::kTrain && dropout_rate > 0) {
      st.lstm_drop_mask = Matrix(hh.rows(), hh.cols());
      const double keep = 1.0 / (1.0 - dropout_rate);
      for (std::size_t i = 0; i < hh.data().size(); ++i) {
        double mask = rng->uniform() < dropout_rate ? 0.0 : keep;
        st.lstm_drop_mask.data()[i] = mask;
        hh.data()[i] *= mask;
      }
    }
    h = std::move(hh);
  }
  if (m.variant.hb_through_dense()) {
    neural::DropoutSpec drop{dropout_rate, mode};
    Matrix zz(T, m.dense.out_dim);
    st.dense_caches.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
      Rng dummy(0);
      auto [row, cache] = neural::dense_forward(in.feats[t], m.dense, drop, rng ? *rng : dummy);
      for (std::size_t c = 0; c < row.size(); ++c) zz(t, c) = row[c];
      st.dense_caches.push_back(std::move(cache));
    }
    z = std::move(zz);
  }

  if (m.variant.hb_direct()) {
    // sparse features feed the projection directly; never densified
    st.phi = Matrix(T, L);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t l = 0; l < L; ++l) st.phi(t, l) = m.proj.b[l];
      for (int idx : in.feats[t].indices)
        for (std::size_t l = 0; l < L; ++l) st.phi(t, l) += m.proj.W(l, static_cast<std::size_t>(idx));
    }
    st.split = 0;
    return st;
  }

  neural::EncoderOutput enc = neural::fuse(h, z);
  st.split = enc.split;
  st.phi = crf::potentials(enc.fused, m.proj);
  st.fused = std::move(enc.fused);
  return st;
}

// Loss plus parameter gradients for one sequence, accumulated into `g`.
inline double sequence_loss_and_grad(const HybridModel& m, const EncodingContext& ctx,
                                     const SequenceInput& in, neural::DropoutMode mode,
                                     double dropout_rate, Rng* rng, ModelGrads& g) {
  const auto& seq = *in.seq;
  const std::size_t T = seq.size(), L = m.label_count();
  ForwardState st = forward_potentials(m, ctx, in, mode, dropout_rate, rng);

  double loss;
  Matrix grad_phi;
  if (m.variant.decoder == Decoder::kCrf) {
    auto [l, cg] = crf::nll_and_grad(st.phi, m.trans, seq.labels);
    loss = l;
    grad_phi = std::move(cg.phi);
    for (std::size_t i = 0; i < cg.a.data().size(); ++i) g.trans_a.data()[i] += cg.a.data()[i];
    for (std::size_t j = 0; j < L; ++j) {
      g.trans_start[j] += cg.start[j];
      g.trans_stop[j] += cg.stop[j];
    }
  } else {
    auto [l, gp] = crf::softmax_nll_and_grad(st.phi, seq.labels);
    loss = l;
    grad_phi = std::move(gp);
  }

  // projection
  for (std::size_t t = 0; t < T; ++t)
    for (std::size_t l = 0; l < L; ++l) g.proj_b[l] += grad_phi(t, l);
  if (m.variant.hb_direct()) {
    for (std::size_t t = 0; t < T; ++t)
      for (int idx : in.feats[t].indices)
        for (std::size_t l = 0; l < L; ++l)
          g.proj_w(l, static_cast<std::size_t>(idx)) += grad_phi(t, l);
    return loss;
  }

  const std::size_t width = m.proj.width();
  Matrix grad_fused(T, width);
  for (std::size_t t = 0; t < T; ++t) {
    auto f = st.fused.row(t);
    auto gf = grad_fused.row(t);
    for (std::size_t l = 0; l < L; ++l) {
      const double gl = grad_phi(t, l);
      auto w = m.proj.W.row(l);
      auto gw = g.proj_w.row(l);
      for (std::size_t c = 0; c < width; ++c) {
        gw[c] += gl * f[c];
        gf[c] += gl * w[c];
      }
    }
  }

  const std::size_t H = st.split;
  if (m.variant.hb_through_dense()) {
    const std::size_t D = m.dense.out_dim;
    Vec gz(D);
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t c = 0; c < D; ++c) gz[c] = grad_fused(t, H + c);
      neural::dense_backward_accum(st.dense_caches[t], gz, m.dense, g.dense_w, g.dense_b);
    }
  }
  if (m.variant.use_lstm) {
    Matrix grad_h(T, H);
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t c = 0; c < H; ++c) grad_h(t, c) = grad_fused(t, c);
    if (!st.lstm_drop_mask.empty())
      for (std::size_t i = 0; i < grad_h.data().size(); ++i)
        grad_h.data()[i] *= st.lstm_drop_mask.data()[i];
    neural::LSTMGrads lg = neural::lstm_backward(st.lstm_cache, grad_h, m.lstm);
    for (std::size_t i = 0; i < lg.w.data().size(); ++i) g.lstm_w.data()[i] += lg.w.data()[i];
    for (std::size_t i = 0; i < lg.u.data().size(); ++i) g.lstm_u.data()[i] += lg.u.data()[i];
    for (std::size_t i = 0; i < lg.b.size(); ++i) g.lstm_b[i] += lg.b[i];
    if (m.variant.embedding == embeddings::SourceKind::kRandomStatic) {
      for (std::size_t t = 0; t < T; ++t) {
        auto gx = lg.x.row(t);
        auto row = g.emb.row(static_cast<std::size_t>(st.emb_rows[t]));
        for (std::size_t c = 0; c < gx.size(); ++c) row[c] += gx[c];
      }
    }
  }
  return loss;
}

inline double sequence_nll(const HybridModel& m, const EncodingContext& ctx,
                           const SequenceInput& in) {
  ForwardState st =
      forward_potentials(m, ctx, in, neural::DropoutMode::kInference, 0.0, nullptr);
  if (m.variant.decoder == Decoder::kCrf)
    return crf::log_partition(st.phi, m.trans) - crf::path_score(st.phi, m.trans, in.seq->labels);
  return crf::softmax_nll_and_grad(st.phi, in.seq->labels).first;
}

inline std::vector<int> predict_sequence(const HybridModel& m, const EncodingContext& ctx,
                                         const SequenceInput& in) {
  ForwardState st =
      forward_potentials(m, ctx, in, neural::DropoutMode::kInference, 0.0, nullptr);
  if (m.variant.decoder == Decoder::kCrf) return crf::viterbi(st.phi, m.trans).path;
  return crf::softmax_decode(st.phi);
}

// ---------------------------------------------------------------------------
// checkpoint: "HYBSEQ1" magic, u64 little-endian header length, JSON header,
// then float64 little-endian parameter blocks in slot order.

inline constexpr char kCheckpointMagic[] = "HYBSEQ1";

inline void append_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline std::uint64_t take_u64(const std::string& s, std::size_t& off) {
  if (off + 8 > s.size()) throw DataError("truncated checkpoint");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(s[off + i])) << (8 * i);
  off += 8;
  return v;
}

inline void append_f64(std::string& out, double d) {
  std::uint64_t bits;
  std::memcpy(&bits, &d, 8);
  append_u64(out, bits);
}

inline double take_f64(const std::string& s, std::size_t& off) {
  std::uint64_t bits = take_u64(s, off);
  double d;
  std::memcpy(&d, &bits, 8);
  return d;
}

// Run metadata embedded alongside the parameters so prediction can rebuild
// the exact feature pipeline.
struct CheckpointExtras {
  std::string vocab_hash;
  std::string vocab_path;
  std::string embedding_path;
  json featurizer_config;  // featurizer_config_to_json output
  // vocabulary of a random-static table, row order
  std::vector<std::string> emb_words;
};

inline std::string save_checkpoint(HybridModel& m, const CheckpointExtras& extras) {
  ModelGrads g = ModelGrads::zeros_like(m);
  auto slots = bind_slots(m, g);
  json header;
  header["format"] = "HYBSEQ1";
  header["version"] = kToolkitVersion;
  header["variant"] = {
      {"embedding", source_kind_name(m.variant.embedding)},
      {"use_hb", m.variant.use_hb},
      {"use_lstm", m.variant.use_lstm},
      {"decoder", m.variant.decoder == Decoder::kCrf ? "crf" : "softmax"},
      {"emb_dim", m.variant.emb_dim},
      {"hidden_dim", m.variant.hidden_dim},
      {"compressed_dim", m.variant.compressed_dim},
      {"dropout_lstm", m.variant.dropout_lstm},
  };
  header["labels"] = m.labels;
  header["scheme"] = m.scheme.scheme == corpus::Scheme::kFlat ? "flat" : "iob";
  header["other_label"] = m.scheme.other_label;
  header["feature_dim"] = m.feature_dim;
  header["input_dim"] = m.input_dim;
  header["vocab_hash"] = extras.vocab_hash;
  header["vocab_path"] = extras.vocab_path;
  header["embedding_path"] = extras.embedding_path;
  header["featurizer"] = extras.featurizer_config;
  if (m.variant.embedding == embeddings::SourceKind::kRandomStatic) {
    header["emb_words"] = extras.emb_words;
    header["emb_rows"] = m.emb_table.matrix.rows();
  }
  json params = json::array();
  for (const auto& s : slots) params.push_back({{"name", s.name}, {"size", s.value.size()}});
  header["params"] = params;

  std::string out(kCheckpointMagic, 7);
  std::string hdr = header.dump();
  append_u64(out, hdr.size());
  out += hdr;
  for (const auto& s : slots)
    for (double v : s.value) append_f64(out, v);
  return out;
}

struct LoadedCheckpoint {
  HybridModel model;
  json header;
};

inline LoadedCheckpoint load_checkpoint(const std::string& content) {
  if (content.size() < 7 || content.compare(0, 7, kCheckpointMagic) != 0)
    throw DataError("not a HYBSEQ1 checkpoint");
  std::size_t off = 7;
  std::uint64_t hlen = take_u64(content, off);
  if (off + hlen > content.size()) throw DataError("truncated checkpoint header");
  json header;
  try {
    header = json::parse(content.substr(off, hlen));
  } catch (const json::exception& e) {
    throw DataError(std::string("bad checkpoint header: ") + e.what());
  }
  off += hlen;

  LoadedCheckpoint out;
  HybridModel& m = out.model;
  const auto& v = header.at("variant");
  m.variant.embedding = source_kind_from_name(v.at("embedding").get<std::string>());
  m.variant.use_hb = v.at("use_hb").get<bool>();
  m.variant.use_lstm = v.at("use_lstm").get<bool>();
  m.variant.decoder = v.at("decoder").get<std::string>() == "crf" ? Decoder::kCrf : Decoder::kSoftmax;
  m.variant.emb_dim = v.at("emb_dim").get<int>();
  m.variant.hidden_dim = v.at("hidden_dim").get<int>();
  m.variant.compressed_dim = v.at("compressed_dim").get<int>();
  m.variant.dropout_lstm = v.at("dropout_lstm").get<bool>();
  m.labels = header.at("labels").get<std::vector<std::string>>();
  m.scheme.labels = m.labels;
  m.scheme.scheme =
      header.at("scheme").get<std::string>() == "flat" ? corpus::Scheme::kFlat : corpus::Scheme::kIob;
  m.scheme.other_label = header.at("other_label").get<std::string>();
  m.feature_dim = header.at("feature_dim").get<int>();
  m.input_dim = header.at("input_dim").get<int>();

  const std::size_t L = m.labels.size();
  const std::size_t H = static_cast<std::size_t>(m.variant.hidden_dim);
  const std::size_t d = static_cast<std::size_t>(m.input_dim);
  if (m.variant.embedding == embeddings::SourceKind::kRandomStatic) {
    auto words = header.at("emb_words").get<std::vector<std::string>>();
    m.emb_table.trainable = true;
    m.emb_table.matrix = Matrix(header.at("emb_rows").get<std::size_t>(), d);
    for (std::size_t i = 0; i < words.size(); ++i)
      m.emb_table.vocab.emplace(words[i], static_cast<int>(i));
    m.emb_table.oov_row = static_cast<int>(words.size());
  }
  if (m.variant.use_lstm) {
    m.lstm.input_dim = d;
    m.lstm.hidden_dim = H;
    m.lstm.W = Matrix(4 * H, d);
    m.lstm.U = Matrix(4 * H, H);
    m.lstm.b.assign(4 * H, 0.0);
  }
  std::size_t width = 0;
  if (m.variant.use_lstm) width += H;
  if (m.variant.hb_through_dense()) {
    const std::size_t D = static_cast<std::size_t>(m.variant.compressed_dim);
    m.dense.in_dim = static_cast<std::size_t>(m.feature_dim);
    m.dense.out_dim = D;
    m.dense.W = Matrix(D, static_cast<std::size_t>(m.feature_dim));
    m.dense.b.assign(D, 0.0);
    width += D;
  } else if (m.variant.hb_direct()) {
    width += static_cast<std::size_t>(m.feature_dim);
  }
  m.proj.W = Matrix(L, width);
  m.proj.b.assign(L, 0.0);
  m.proj.split = m.variant.use_lstm ? H : 0;
  m.trans = crf::TransitionParams(L);

  ModelGrads g = ModelGrads::zeros_like(m);
  auto slots = bind_slots(m, g);
  const auto& declared = header.at("params");
  if (declared.size() != slots.size()) throw DataError("checkpoint parameter blocks mismatch");
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (declared[i].at("name").get<std::string>() != slots[i].name ||
        declared[i].at("size").get<std::size_t>() != slots[i].value.size())
      throw DataError("checkpoint block '" + slots[i].name + "' does not match model layout");
    for (double& x : slots[i].value) x = take_f64(content, off);
  }
  if (off != content.size()) throw DataError("trailing bytes in checkpoint");
  out.header = std::move(header);
  return out;
}

}  // namespace hybridseq::model
