#pragma once

// Hand-built sparse features per token: adjacent words, adjacent POS tags,
// orthography, cue-word context flags, and lexicon span membership, vectorized
// against a frozen feature vocabulary. Features are binary; value-0 flags are
// simply not emitted.

#include <algorithm>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "hybridseq/common.hpp"
#include "hybridseq/corpus.hpp"
#include "hybridseq/lexicon.hpp"

namespace hybridseq::featurizer {

using json = nlohmann::json;

struct FeaturizerConfig {
  int word_window = 4;  // each side
  int pos_window = 4;   // each side
  bool enable_orthography = true;
  std::vector<lexicon::CueLexicon> cue_lexicons;
  std::vector<lexicon::Lexicon> span_lexicons;
  // source paths, kept for checkpoint headers
  std::vector<std::string> cue_lexicon_paths;
  std::vector<std::string> span_lexicon_paths;
};

inline FeaturizerConfig featurizer_config_from_json(const json& j,
                                                    const std::string& base_dir = "") {
  FeaturizerConfig cfg;
  try {
    cfg.word_window = j.value("word_window", 4);
    cfg.pos_window = j.value("pos_window", 4);
    cfg.enable_orthography = j.value("orthography", true);
    auto resolve = [&base_dir](const std::string& p) {
      std::filesystem::path fp(p);
      if (fp.is_absolute() || base_dir.empty()) return p;
      return (std::filesystem::path(base_dir) / fp).string();
    };
    for (const auto& p : j.value("cue_lexicons", std::vector<std::string>{})) {
      std::string rp = resolve(p);
      try {
        cfg.cue_lexicons.push_back(lexicon::load_cue_lexicon(rp));
      } catch (const DataError& e) {
        throw ConfigError("featurizer.cue_lexicons entry '" + p + "': " + e.what());
      }
      cfg.cue_lexicon_paths.push_back(rp);
    }
    for (const auto& p : j.value("span_lexicons", std::vector<std::string>{})) {
      std::string rp = resolve(p);
      try {
        cfg.span_lexicons.push_back(lexicon::load_lexicon(rp));
      } catch (const DataError& e) {
        throw ConfigError("featurizer.span_lexicons entry '" + p + "': " + e.what());
      }
      cfg.span_lexicon_paths.push_back(rp);
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad featurizer config: ") + e.what());
  }
  if (cfg.word_window < 0 || cfg.pos_window < 0) throw ConfigError("feature windows must be >= 0");
  return cfg;
}

inline json featurizer_config_to_json(const FeaturizerConfig& cfg) {
  json j;
  j["word_window"] = cfg.word_window;
  j["pos_window"] = cfg.pos_window;
  j["orthography"] = cfg.enable_orthography;
  j["cue_lexicons"] = cfg.cue_lexicon_paths;
  j["span_lexicons"] = cfg.span_lexicon_paths;
  return j;
}

// ---------------------------------------------------------------------------
// orthography predicates (ASCII)

inline bool is_upper_token(const std::string& s) {
  bool any_alpha = false;
  for (unsigned char c : s) {
    if (std::isalpha(c)) {
      any_alpha = true;
      if (!std::isupper(c)) return false;
    }
  }
  return any_alpha;
}

inline bool is_title_token(const std::string& s) {
  if (s.empty() || !std::isupper(static_cast<unsigned char>(s[0]))) return false;
  for (std::size_t i = 1; i < s.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (std::isalpha(c) && std::isupper(c)) return false;
  }
  return true;
}

inline bool is_punct_token(const std::string& s) {
  if (s.empty()) return false;
  for (unsigned char c : s)
    if (!std::ispunct(c)) return false;
  return true;
}

// ---------------------------------------------------------------------------
// feature emission

// Per-sequence lexicon query results, computed once and shared across tokens.
struct SequenceFeatureCache {
  std::vector<std::vector<lexicon::ContextFlags>> cue_flags;  // per cue lexicon
  std::vector<std::vector<bool>> in_span;                     // per span lexicon
};

inline SequenceFeatureCache build_feature_cache(const corpus::LabeledSequence& seq,
                                                const FeaturizerConfig& cfg) {
  std::vector<std::string> texts;
  texts.reserve(seq.size());
  for (const auto& t : seq.tokens) texts.push_back(t.text);
  SequenceFeatureCache cache;
  for (const auto& cue : cfg.cue_lexicons)
    cache.cue_flags.push_back(lexicon::cue_context_flags(texts, cue));
  for (const auto& lex : cfg.span_lexicons) {
    std::vector<bool> member(seq.size(), false);
    for (const auto& span : lexicon::match_spans(texts, lex))
      for (std::size_t i = span.start; i < span.end; ++i) member[i] = true;
    cache.in_span.push_back(std::move(member));
  }
  return cache;
}

// Feature strings for token i, in deterministic order. Pure in the sequence
// tokens, POS tags, position and config; labels are never consulted.
inline std::vector<std::string> featurize_token(const corpus::LabeledSequence& seq,
                                                std::size_t i, const FeaturizerConfig& cfg,
                                                const SequenceFeatureCache* cache = nullptr) {
  if (i >= seq.size()) throw DataError("featurize_token: position out of range");
  std::vector<std::string> out;
  const int n = static_cast<int>(seq.size());
  const int pos = static_cast<int>(i);

  auto offset_tag = [](int k) {
    if (k < 0) return "-" + std::to_string(-k);
    if (k > 0) return "+" + std::to_string(k);
    return std::string();
  };

  // window 0 disables the family entirely
  if (cfg.word_window > 0) {
    for (int k = -cfg.word_window; k <= cfg.word_window; ++k) {
      int j = pos + k;
      if (j < 0 || j >= n) continue;
      out.push_back("word" + offset_tag(k) + ":" + seq.tokens[j].text);
    }
  }
  if (cfg.pos_window > 0) {
    for (int k = -cfg.pos_window; k <= cfg.pos_window; ++k) {
      int j = pos + k;
      if (j < 0 || j >= n) continue;
      if (!seq.tokens[j].pos_tag) continue;
      out.push_back("tag" + offset_tag(k) + ":" + *seq.tokens[j].pos_tag);
    }
  }
  out.push_back("bias:1");
  if (cfg.enable_orthography) {
    const std::string& text = seq.tokens[i].text;
    if (is_upper_token(text)) out.push_back("is_upper");
    if (is_title_token(text)) out.push_back("is_title");
    if (is_punct_token(text)) out.push_back("is_punctuation");
  }

  std::optional<SequenceFeatureCache> local;
  if (!cache) {
    local = build_feature_cache(seq, cfg);
    cache = &*local;
  }
  for (std::size_t c = 0; c < cfg.cue_lexicons.size(); ++c) {
    const auto& flags = cache->cue_flags[c][i];
    if (flags.in_left_context) out.push_back(cfg.cue_lexicons[c].name + ":in_left_context");
    if (flags.in_right_context) out.push_back(cfg.cue_lexicons[c].name + ":in_right_context");
  }
  for (std::size_t s = 0; s < cfg.span_lexicons.size(); ++s)
    if (cache->in_span[s][i]) out.push_back(cfg.span_lexicons[s].name + ":in_span");
  return out;
}

// ---------------------------------------------------------------------------
// vocabulary

struct FeatureVocabulary {
  std::unordered_map<std::string, int> index;
  std::vector<std::string> names;  // id -> feature string
  bool frozen = false;

  int add(const std::string& feature) {
    if (frozen) throw ConfigError("insert into frozen feature vocabulary");
    auto it = index.find(feature);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(names.size());
    index.emplace(feature, id);
    names.push_back(feature);
    return id;
  }

  int id_of(const std::string& feature) const {
    auto it = index.find(feature);
    return it == index.end() ? -1 : it->second;
  }

  std::size_t size() const { return names.size(); }

  std::uint64_t content_hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (std::size_t i = 0; i < names.size(); ++i) {
      h = fnv1a64(names[i], h);
      h = fnv1a64(std::string_view("\t") , h);
      h = fnv1a64(std::to_string(i), h);
      h = fnv1a64(std::string_view("\n"), h);
    }
    return h;
  }

  std::string to_tsv() const {
    std::ostringstream out;
    for (std::size_t i = 0; i < names.size(); ++i) out << names[i] << '\t' << i << '\n';
    return out.str();
  }

  static FeatureVocabulary from_tsv(const std::string& content) {
    FeatureVocabulary v;
    int lineno = 0;
    for (const auto& line : split_on(content, '\n')) {
      ++lineno;
      if (line.empty()) continue;
      auto cols = split_on(line, '\t');
      if (cols.size() != 2)
        throw DataError("vocabulary line " + std::to_string(lineno) + ": expected feature<TAB>id");
      int id = std::stoi(cols[1]);
      if (id != static_cast<int>(v.names.size()))
        throw DataError("vocabulary line " + std::to_string(lineno) + ": ids must be contiguous");
      v.index.emplace(cols[0], id);
      v.names.push_back(cols[0]);
    }
    v.frozen = true;
    return v;
  }
};

// Union of feature strings over all tokens, ids by first occurrence; frozen.
inline FeatureVocabulary build_vocabulary(const corpus::Dataset& d, const FeaturizerConfig& cfg) {
  if (d.sequences.empty()) throw DataError("build_vocabulary: empty dataset");
  FeatureVocabulary v;
  for (const auto& seq : d.sequences) {
    auto cache = build_feature_cache(seq, cfg);
    for (std::size_t i = 0; i < seq.size(); ++i)
      for (const auto& f : featurize_token(seq, i, cfg, &cache)) v.add(f);
  }
  v.frozen = true;
  return v;
}

struct SparseFeatureVector {
  std::vector<int> indices;  // strictly increasing
  int dimension = 0;
};

// Known strings map to ids (duplicates collapsed); unknown strings are
// dropped, which is the test-time OOV policy.
inline SparseFeatureVector vectorize(const std::vector<std::string>& features,
                                     const FeatureVocabulary& vocab) {
  if (!vocab.frozen) throw ConfigError("vectorize requires a frozen vocabulary");
  SparseFeatureVector out;
  out.dimension = static_cast<int>(vocab.size());
  for (const auto& f : features) {
    int id = vocab.id_of(f);
    if (id >= 0) out.indices.push_back(id);
  }
  std::sort(out.indices.begin(), out.indices.end());
  out.indices.erase(std::unique(out.indices.begin(), out.indices.end()), out.indices.end());
  return out;
}

}  // namespace hybridseq::featurizer
