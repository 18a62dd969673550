#pragma once

// Dataset model and file I/O: tokenized sequences with one label per token,
// flat or IOB label schemes, fold construction for cross-validation, and a
// seeded synthetic-corpus generator for desk-scale experiments.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "hybridseq/common.hpp"
#include "hybridseq/rng.hpp"

namespace hybridseq::corpus {

using json = nlohmann::json;

struct Token {
  std::string text;
  std::optional<std::string> pos_tag;
};

struct LabeledSequence {
  std::string doc_id;
  std::vector<Token> tokens;
  std::vector<int> labels;  // ids into the dataset's LabelScheme

  std::size_t size() const { return tokens.size(); }
};

enum class Scheme { kFlat, kIob };

struct LabelScheme {
  std::vector<std::string> labels;
  Scheme scheme = Scheme::kFlat;
  std::string other_label = "Other";

  int label_id(const std::string& name) const {
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == name) return static_cast<int>(i);
    return -1;
  }

  int other_id() const { return label_id(other_label); }

  void validate() const {
    std::set<std::string> seen;
    for (const auto& l : labels) {
      if (!seen.insert(l).second) throw DataError("duplicate label in scheme: " + l);
    }
    if (label_id(other_label) < 0)
      throw DataError("other label '" + other_label + "' not in label set");
    if (scheme == Scheme::kIob) {
      for (const auto& l : labels) {
        if (l == other_label) continue;
        if (l.rfind("B-", 0) != 0 && l.rfind("I-", 0) != 0)
          throw DataError("iob scheme label without B-/I- prefix: " + l);
        std::string base = l.substr(2);
        if (label_id("B-" + base) < 0 || label_id("I-" + base) < 0)
          throw DataError("iob scheme missing B-/I- pair for: " + base);
      }
    }
  }
};

struct DatasetSplit {
  std::set<std::string> train_ids;
  std::set<std::string> test_ids;
};

struct Dataset {
  LabelScheme scheme;
  std::vector<LabeledSequence> sequences;
  std::optional<DatasetSplit> split;

  void validate() const {
    scheme.validate();
    std::unordered_set<std::string> ids;
    for (const auto& s : sequences) {
      if (!ids.insert(s.doc_id).second) throw DataError("duplicate doc_id: " + s.doc_id);
      if (s.labels.size() != s.tokens.size())
        throw DataError("doc " + s.doc_id + ": " + std::to_string(s.tokens.size()) +
                        " tokens but " + std::to_string(s.labels.size()) + " labels");
      for (const auto& t : s.tokens) {
        if (t.text.empty()) throw DataError("doc " + s.doc_id + ": empty token");
        if (has_whitespace(t.text))
          throw DataError("doc " + s.doc_id + ": token with embedded whitespace: '" + t.text + "'");
      }
      for (int l : s.labels)
        if (l < 0 || l >= static_cast<int>(scheme.labels.size()))
          throw DataError("doc " + s.doc_id + ": label id out of range");
    }
    if (split) {
      for (const auto& id : split->train_ids)
        if (split->test_ids.count(id)) throw DataError("doc in both splits: " + id);
      for (const auto& id : split->train_ids)
        if (!ids.count(id)) throw DataError("split references unknown doc: " + id);
      for (const auto& id : split->test_ids)
        if (!ids.count(id)) throw DataError("split references unknown doc: " + id);
    }
  }

  Dataset subset(const std::set<std::string>& ids) const {
    Dataset out;
    out.scheme = scheme;
    for (const auto& s : sequences)
      if (ids.count(s.doc_id)) out.sequences.push_back(s);
    return out;
  }

  std::size_t total_tokens() const {
    std::size_t n = 0;
    for (const auto& s : sequences) n += s.size();
    return n;
  }
};

enum class Format { kJsonl, kConll };

// ---------------------------------------------------------------------------
// JSONL: header object on line 1, one sequence object per following line.

inline Dataset load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset: " + path);
  std::string line;
  int lineno = 0;
  Dataset d;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw DataError(path + " line " + std::to_string(lineno) + ": malformed JSON: " + e.what());
    }
    if (!have_header) {
      if (!j.contains("labels") || !j.contains("scheme") || !j.contains("other"))
        throw DataError(path + " line 1: header must declare labels, scheme, other");
      d.scheme.labels = j.at("labels").get<std::vector<std::string>>();
      std::string s = j.at("scheme").get<std::string>();
      if (s == "flat")
        d.scheme.scheme = Scheme::kFlat;
      else if (s == "iob")
        d.scheme.scheme = Scheme::kIob;
      else
        throw DataError(path + " line 1: unknown scheme '" + s + "'");
      d.scheme.other_label = j.at("other").get<std::string>();
      d.scheme.validate();
      have_header = true;
      continue;
    }
    LabeledSequence seq;
    try {
      seq.doc_id = j.at("doc_id").get<std::string>();
      auto toks = j.at("tokens").get<std::vector<std::string>>();
      std::vector<std::string> pos;
      if (j.contains("pos") && !j.at("pos").is_null())
        pos = j.at("pos").get<std::vector<std::string>>();
      auto labels = j.at("labels").get<std::vector<std::string>>();
      if (labels.size() != toks.size())
        throw DataError(path + " line " + std::to_string(lineno) + ": " +
                        std::to_string(toks.size()) + " tokens but " +
                        std::to_string(labels.size()) + " labels");
      if (!pos.empty() && pos.size() != toks.size())
        throw DataError(path + " line " + std::to_string(lineno) + ": pos length mismatch");
      for (std::size_t i = 0; i < toks.size(); ++i) {
        Token t;
        t.text = toks[i];
        if (!pos.empty() && pos[i] != "_") t.pos_tag = pos[i];  // "_" = no tag
        seq.tokens.push_back(std::move(t));
        int id = d.scheme.label_id(labels[i]);
        if (id < 0)
          throw DataError(path + " line " + std::to_string(lineno) + ": label '" + labels[i] +
                          "' not in scheme");
        seq.labels.push_back(id);
      }
    } catch (const json::exception& e) {
      throw DataError(path + " line " + std::to_string(lineno) + ": bad record: " + e.what());
    }
    d.sequences.push_back(std::move(seq));
  }
  if (!have_header) throw DataError(path + ": missing header line");
  d.validate();
  return d;
}

inline std::string dataset_to_jsonl(const Dataset& d) {
  std::ostringstream out;
  json header;
  header["labels"] = d.scheme.labels;
  header["scheme"] = d.scheme.scheme == Scheme::kFlat ? "flat" : "iob";
  header["other"] = d.scheme.other_label;
  out << header.dump() << "\n";
  for (const auto& s : d.sequences) {
    json j;
    j["doc_id"] = s.doc_id;
    std::vector<std::string> toks, labels;
    for (const auto& t : s.tokens) toks.push_back(t.text);
    for (int l : s.labels) labels.push_back(d.scheme.labels[l]);
    j["tokens"] = toks;
    j["labels"] = labels;
    bool any_pos = false;
    for (const auto& t : s.tokens) any_pos = any_pos || t.pos_tag.has_value();
    if (any_pos) {
      std::vector<std::string> pos;
      for (const auto& t : s.tokens) pos.push_back(t.pos_tag.value_or("_"));
      j["pos"] = pos;
    } else {
      j["pos"] = nullptr;
    }
    out << j.dump() << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// CoNLL: TOKEN \t POS \t LABEL, blank line between sequences, "_" = no POS.
// The format carries no label-scheme header; pass one, or the loader infers
// it (labels in first-occurrence order, background "O"/"Other" if present).

inline Dataset load_conll(const std::string& path, std::optional<LabelScheme> scheme = {}) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset: " + path);
  std::string line;
  int lineno = 0;
  std::vector<LabeledSequence> seqs;
  std::vector<std::string> label_order;
  std::unordered_map<std::string, int> label_count;
  LabeledSequence cur;
  std::vector<std::string> cur_labels;
  std::vector<std::vector<std::string>> all_labels;
  auto flush = [&] {
    if (cur.tokens.empty()) return;
    cur.doc_id = "seq" + std::to_string(seqs.size());
    seqs.push_back(cur);
    all_labels.push_back(cur_labels);
    cur = LabeledSequence{};
    cur_labels.clear();
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) {
      flush();
      continue;
    }
    auto cols = split_on(line, '\t');
    if (cols.size() != 3)
      throw DataError(path + " line " + std::to_string(lineno) +
                      ": expected TOKEN<TAB>POS<TAB>LABEL, got " + std::to_string(cols.size()) +
                      " columns");
    Token t;
    t.text = cols[0];
    if (t.text.empty())
      throw DataError(path + " line " + std::to_string(lineno) + ": empty token");
    if (cols[1] != "_") t.pos_tag = cols[1];
    cur.tokens.push_back(std::move(t));
    cur_labels.push_back(cols[2]);
    if (!label_count.count(cols[2])) label_order.push_back(cols[2]);
    label_count[cols[2]]++;
  }
  flush();

  Dataset d;
  if (scheme) {
    d.scheme = *scheme;
  } else {
    d.scheme.labels = label_order;
    if (label_count.count("O"))
      d.scheme.other_label = "O";
    else if (label_count.count("Other"))
      d.scheme.other_label = "Other";
    else {
      std::string best;
      int best_n = -1;
      for (const auto& l : label_order)
        if (label_count[l] > best_n) best = l, best_n = label_count[l];
      d.scheme.other_label = best;
    }
    bool any_bi = false, all_bi = true;
    for (const auto& l : label_order) {
      if (l == d.scheme.other_label) continue;
      if (l.rfind("B-", 0) == 0 || l.rfind("I-", 0) == 0)
        any_bi = true;
      else
        all_bi = false;
    }
    if (any_bi && all_bi) {
      // complete missing B-/I- pairs so the scheme validates
      std::vector<std::string> completed;
      completed.push_back(d.scheme.other_label);
      std::vector<std::string> bases;
      for (const auto& l : label_order) {
        if (l == d.scheme.other_label) continue;
        std::string base = l.substr(2);
        if (std::find(bases.begin(), bases.end(), base) == bases.end()) bases.push_back(base);
      }
      for (const auto& b : bases) {
        completed.push_back("B-" + b);
        completed.push_back("I-" + b);
      }
      d.scheme.labels = completed;
      d.scheme.scheme = Scheme::kIob;
    }
  }
  d.scheme.validate();
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (const auto& name : all_labels[i]) {
      int id = d.scheme.label_id(name);
      if (id < 0) throw DataError(path + " doc " + seqs[i].doc_id + ": label '" + name + "' not in scheme");
      seqs[i].labels.push_back(id);
    }
  }
  d.sequences = std::move(seqs);
  d.validate();
  return d;
}

inline std::string dataset_to_conll(const Dataset& d) {
  std::ostringstream out;
  for (std::size_t i = 0; i < d.sequences.size(); ++i) {
    const auto& s = d.sequences[i];
    for (std::size_t t = 0; t < s.size(); ++t) {
      out << s.tokens[t].text << '\t' << s.tokens[t].pos_tag.value_or("_") << '\t'
          << d.scheme.labels[s.labels[t]] << '\n';
    }
    if (i + 1 < d.sequences.size()) out << '\n';
  }
  return out.str();
}

inline Dataset load_dataset(const std::string& path, Format format,
                            std::optional<LabelScheme> scheme = {}) {
  return format == Format::kJsonl ? load_jsonl(path) : load_conll(path, std::move(scheme));
}

inline void write_dataset(const std::string& path, const Dataset& d, Format format) {
  write_file(path, format == Format::kJsonl ? dataset_to_jsonl(d) : dataset_to_conll(d));
}

// ---------------------------------------------------------------------------
// IOB handling

inline std::string strip_iob_prefix(const std::string& label) {
  if (label.rfind("B-", 0) == 0 || label.rfind("I-", 0) == 0) return label.substr(2);
  return label;
}

// Merge B-X/I-X into X; the scheme becomes flat.
inline Dataset iob_collapse(const Dataset& d) {
  if (d.scheme.scheme != Scheme::kIob)
    throw DataError("iob_collapse called on a flat-scheme dataset");
  Dataset out;
  out.scheme.scheme = Scheme::kFlat;
  out.scheme.other_label = d.scheme.other_label;
  std::vector<int> id_map(d.scheme.labels.size());
  for (std::size_t i = 0; i < d.scheme.labels.size(); ++i) {
    std::string base = strip_iob_prefix(d.scheme.labels[i]);
    int id = out.scheme.label_id(base);
    if (id < 0) {
      out.scheme.labels.push_back(base);
      id = static_cast<int>(out.scheme.labels.size()) - 1;
    }
    id_map[i] = id;
  }
  out.split = d.split;
  for (const auto& s : d.sequences) {
    LabeledSequence ns = s;
    for (auto& l : ns.labels) l = id_map[l];
    out.sequences.push_back(std::move(ns));
  }
  out.validate();
  return out;
}

struct Chunk {
  std::size_t start;
  std::size_t end;  // exclusive
  int label;
};

// Maximal runs of identical non-background labels, sorted by start.
inline std::vector<Chunk> chunks_from_label_ids(std::span<const int> labels, int other_id) {
  std::vector<Chunk> out;
  std::size_t i = 0;
  while (i < labels.size()) {
    if (labels[i] == other_id) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < labels.size() && labels[j] == labels[i]) ++j;
    out.push_back({i, j, labels[i]});
    i = j;
  }
  return out;
}

inline std::vector<Chunk> chunks_from_labels(const LabeledSequence& s, const LabelScheme& scheme) {
  if (scheme.scheme != Scheme::kFlat)
    throw DataError("chunks_from_labels requires a flat scheme");
  return chunks_from_label_ids(s.labels, scheme.other_id());
}

// Mark chunk-initial tokens B-X, the rest I-X; inverse of iob_collapse.
inline Dataset iob_expand(const Dataset& d) {
  if (d.scheme.scheme != Scheme::kFlat)
    throw DataError("iob_expand called on an iob-scheme dataset");
  Dataset out;
  out.scheme.scheme = Scheme::kIob;
  out.scheme.other_label = d.scheme.other_label;
  for (const auto& l : d.scheme.labels) {
    if (l == d.scheme.other_label) {
      out.scheme.labels.push_back(l);
    } else {
      out.scheme.labels.push_back("B-" + l);
      out.scheme.labels.push_back("I-" + l);
    }
  }
  out.split = d.split;
  const int other = d.scheme.other_id();
  const int new_other = out.scheme.other_id();
  for (const auto& s : d.sequences) {
    LabeledSequence ns;
    ns.doc_id = s.doc_id;
    ns.tokens = s.tokens;
    ns.labels.assign(s.size(), new_other);
    for (const auto& c : chunks_from_label_ids(s.labels, other)) {
      const std::string& base = d.scheme.labels[c.label];
      int b_id = out.scheme.label_id("B-" + base);
      int i_id = out.scheme.label_id("I-" + base);
      ns.labels[c.start] = b_id;
      for (std::size_t t = c.start + 1; t < c.end; ++t) ns.labels[t] = i_id;
    }
    out.sequences.push_back(std::move(ns));
  }
  out.validate();
  return out;
}

// ---------------------------------------------------------------------------
// Fold construction

struct SplitPlan {
  int k = 0;
  std::map<std::string, int> fold_assignments;
  std::uint64_t seed = 0;

  std::set<std::string> fold_ids(int fold) const {
    std::set<std::string> out;
    for (const auto& [id, f] : fold_assignments)
      if (f == fold) out.insert(id);
    return out;
  }

  std::set<std::string> complement_ids(int fold) const {
    std::set<std::string> out;
    for (const auto& [id, f] : fold_assignments)
      if (f != fold) out.insert(id);
    return out;
  }
};

// Shuffle doc ids with a seeded PRNG, then deal round-robin.
inline SplitPlan make_folds(const Dataset& d, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("make_folds: k must be >= 2");
  if (static_cast<std::size_t>(k) > d.sequences.size())
    throw ConfigError("make_folds: k=" + std::to_string(k) + " exceeds dataset size " +
                      std::to_string(d.sequences.size()));
  std::vector<std::string> ids;
  for (const auto& s : d.sequences) ids.push_back(s.doc_id);
  Rng rng(seed);
  rng.shuffle(ids);
  SplitPlan plan;
  plan.k = k;
  plan.seed = seed;
  for (std::size_t i = 0; i < ids.size(); ++i)
    plan.fold_assignments[ids[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return plan;
}

// ---------------------------------------------------------------------------
// Synthetic corpus generator. Sequences are filler tokens with labeled spans
// planted on top; a span is a phrase from one of two pools (a finite pool
// listed in a lexicon file, or an open pool marked by a token prefix) with an
// optional cue word placed immediately to its left. Decoy cues appear before
// plain filler so cue context alone does not determine the label.

struct GenLabelSpec {
  std::string name;
  double spans_per_sequence = 0.5;
  double spans_per_token = 0.0;     // added rate proportional to length
  std::vector<std::string> cue_words;
  double decoy_rate = 0.0;          // cues placed before non-span tokens
  double decoys_per_token = 0.0;
  std::string decoy_fresh_prefix;   // decoy targets drawn fresh with this
                                    // prefix instead of from the filler vocab
  int phrase_min = 1;
  int phrase_max = 3;
  int lexicon_entries = 0;          // size of the in-lexicon phrase pool
  double lexicon_fraction = 1.0;    // fraction of spans drawn from that pool
  std::string lexicon_morph_prefix; // when set, lexicon-pool tokens carry it
  std::string morph_prefix;         // open pool marker; empty disables
  std::string morph_mark = "all";   // which phrase tokens carry the marker:
                                    // "all", "first", or "last"; unmarked
                                    // positions get fresh neutral strings, so
                                    // only label adjacency identifies them
  int decoy_min = 1;                // decoy tail length range
  int decoy_max = 1;
  std::string pool_group;           // labels sharing a group share the pool
};

struct LengthBucket {
  double weight = 1.0;
  int min_len = 5;
  int max_len = 25;
};

struct GeneratorConfig {
  std::string name = "synthetic";
  std::string other_label = "Other";
  int filler_vocab = 300;
  std::vector<LengthBucket> length_buckets{{1.0, 12, 22}};
  std::vector<GenLabelSpec> labels;
  double pos_fraction = 1.0;
  int n_sequences = 100;
  int embedding_dim = 24;
  int embedding_noise_after = -1;
  double embedding_noise_scale = 1.0;
};

inline GeneratorConfig generator_config_from_json(const json& j) {
  GeneratorConfig g;
  try {
    if (j.contains("name")) g.name = j.at("name").get<std::string>();
    if (j.contains("other_label")) g.other_label = j.at("other_label").get<std::string>();
    if (j.contains("filler_vocab")) g.filler_vocab = j.at("filler_vocab").get<int>();
    if (j.contains("pos_fraction")) g.pos_fraction = j.at("pos_fraction").get<double>();
    if (j.contains("n_sequences")) g.n_sequences = j.at("n_sequences").get<int>();
    if (j.contains("embedding_dim")) g.embedding_dim = j.at("embedding_dim").get<int>();
    if (j.contains("embedding_noise_after"))
      g.embedding_noise_after = j.at("embedding_noise_after").get<int>();
    if (j.contains("embedding_noise_scale"))
      g.embedding_noise_scale = j.at("embedding_noise_scale").get<double>();
    if (j.contains("length_buckets")) {
      g.length_buckets.clear();
      for (const auto& b : j.at("length_buckets"))
        g.length_buckets.push_back({b.value("weight", 1.0), b.at("min").get<int>(),
                                    b.at("max").get<int>()});
    }
    for (const auto& l : j.value("labels", json::array())) {
      GenLabelSpec s;
      s.name = l.at("name").get<std::string>();
      s.spans_per_sequence = l.value("spans_per_sequence", 0.5);
      s.spans_per_token = l.value("spans_per_token", 0.0);
      s.cue_words = l.value("cue_words", std::vector<std::string>{});
      s.decoy_rate = l.value("decoy_rate", 0.0);
      s.decoys_per_token = l.value("decoys_per_token", 0.0);
      s.decoy_fresh_prefix = l.value("decoy_fresh_prefix", std::string());
      s.phrase_min = l.value("phrase_min", 1);
      s.phrase_max = l.value("phrase_max", 3);
      s.lexicon_entries = l.value("lexicon_entries", 0);
      s.lexicon_fraction = l.value("lexicon_fraction", 1.0);
      s.lexicon_morph_prefix = l.value("lexicon_morph_prefix", std::string());
      s.morph_prefix = l.value("morph_prefix", std::string());
      s.morph_mark = l.value("morph_mark", std::string("all"));
      s.decoy_min = l.value("decoy_min", 1);
      s.decoy_max = l.value("decoy_max", 1);
      s.pool_group = l.value("pool_group", s.name);
      g.labels.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad generator config: ") + e.what());
  }
  return g;
}

// The in-lexicon phrase pool is a pure function of (config name, pool group),
// so every corpus drawn from the same config shares one lexicon file, and
// labels with the same pool group draw from one shared pool.
inline std::vector<std::vector<std::string>> lexicon_pool(const GeneratorConfig& cfg,
                                                          const GenLabelSpec& spec) {
  const std::string group = spec.pool_group.empty() ? spec.name : spec.pool_group;
  Rng rng(fnv1a64(cfg.name + "/" + group));
  std::vector<std::vector<std::string>> pool;
  std::set<std::string> used;
  static const char* kAlpha = "abcdefghijklmnopqrstuvwxyz";
  for (int e = 0; e < spec.lexicon_entries; ++e) {
    int len = rng.uniform_int(spec.phrase_min, spec.phrase_max);
    std::vector<std::string> phrase;
    for (int t = 0; t < len; ++t) {
      std::string tok;
      do {
        if (!spec.lexicon_morph_prefix.empty()) {
          tok = spec.lexicon_morph_prefix + std::to_string(rng.below(1000000));
        } else {
          tok.clear();
          int n = rng.uniform_int(5, 8);
          for (int c = 0; c < n; ++c) tok += kAlpha[rng.below(26)];
        }
      } while (used.count(tok));
      used.insert(tok);
      phrase.push_back(tok);
    }
    pool.push_back(std::move(phrase));
  }
  return pool;
}

struct SyntheticCorpus {
  Dataset dataset;
  // pool group -> phrases for the lexicon file covering that pool
  std::map<std::string, std::vector<std::vector<std::string>>> lexicons;
};

inline SyntheticCorpus generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed) {
  if (cfg.labels.empty()) throw ConfigError("generator config declares no labels");
  if (cfg.length_buckets.empty()) throw ConfigError("generator config declares no length buckets");
  for (const auto& l : cfg.labels) {
    if (l.lexicon_entries <= 0 && l.morph_prefix.empty())
      throw ConfigError("empty lexicon for declared label '" + l.name + "'");
    if (l.lexicon_entries < 0) throw ConfigError("negative lexicon size for '" + l.name + "'");
    if (l.phrase_min < 1 || l.phrase_max < l.phrase_min)
      throw ConfigError("bad phrase length range for '" + l.name + "'");
  }

  SyntheticCorpus out;
  out.dataset.scheme.scheme = Scheme::kFlat;
  out.dataset.scheme.other_label = cfg.other_label;
  out.dataset.scheme.labels.push_back(cfg.other_label);
  for (const auto& l : cfg.labels) out.dataset.scheme.labels.push_back(l.name);
  out.dataset.scheme.validate();

  std::vector<std::vector<std::vector<std::string>>> pools;
  for (const auto& l : cfg.labels) {
    pools.push_back(lexicon_pool(cfg, l));
    const std::string group = l.pool_group.empty() ? l.name : l.pool_group;
    if (!pools.back().empty()) out.lexicons[group] = pools.back();
  }

  static const std::vector<std::string> kTags = {"NN", "VB", "JJ", "IN", "DT", "RB"};
  auto pseudo_pos = [](const std::string& text) {
    return kTags[fnv1a64(text) % kTags.size()];
  };

  double total_weight = 0;
  for (const auto& b : cfg.length_buckets) total_weight += b.weight;

  Rng rng(splitmix64(seed ^ fnv1a64(cfg.name)));
  for (int n = 0; n < cfg.n_sequences; ++n) {
    // sequence length from the bucket mixture
    double pick = rng.uniform() * total_weight;
    const LengthBucket* bucket = &cfg.length_buckets.back();
    for (const auto& b : cfg.length_buckets) {
      if (pick < b.weight) {
        bucket = &b;
        break;
      }
      pick -= b.weight;
    }
    int len = rng.uniform_int(bucket->min_len, bucket->max_len);

    LabeledSequence seq;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "d%05d", n);
    seq.doc_id = idbuf;
    bool with_pos = rng.uniform() < cfg.pos_fraction;
    for (int t = 0; t < len; ++t) {
      Token tok;
      tok.text = "f" + std::to_string(rng.below(static_cast<std::uint64_t>(cfg.filler_vocab)));
      seq.tokens.push_back(std::move(tok));
    }
    seq.labels.assign(len, 0);
    std::vector<bool> reserved(len, false);  // span tokens and cue positions

    auto place = [&](const std::vector<std::string>& phrase, const std::string& cue,
                     int label_id) {
      int need = static_cast<int>(phrase.size()) + (cue.empty() ? 0 : 1);
      std::vector<int> starts;
      for (int p = 0; p + need <= len; ++p) {
        bool free = true;
        for (int q = p; q < p + need; ++q) free = free && !reserved[q];
        if (free) starts.push_back(p);
      }
      if (starts.empty()) return;
      int p = starts[rng.below(starts.size())];
      int offset = 0;
      if (!cue.empty()) {
        seq.tokens[p].text = cue;
        reserved[p] = true;
        offset = 1;
      }
      for (std::size_t q = 0; q < phrase.size(); ++q) {
        seq.tokens[p + offset + q].text = phrase[q];
        if (label_id >= 0) seq.labels[p + offset + q] = label_id;
        reserved[p + offset + q] = true;
      }
    };

    auto draw_count = [&rng](double rate) {
      return static_cast<int>(rate) + (rng.uniform() < rate - static_cast<int>(rate) ? 1 : 0);
    };
    for (std::size_t li = 0; li < cfg.labels.size(); ++li) {
      const auto& spec = cfg.labels[li];
      const int label_id = static_cast<int>(li) + 1;
      int k = draw_count(spec.spans_per_sequence + spec.spans_per_token * len);
      for (int s = 0; s < k; ++s) {
        bool from_lexicon = spec.lexicon_entries > 0 &&
                            (spec.morph_prefix.empty() || rng.uniform() < spec.lexicon_fraction);
        std::vector<std::string> phrase;
        if (from_lexicon) {
          phrase = pools[li][rng.below(static_cast<std::uint64_t>(spec.lexicon_entries))];
        } else {
          int plen = rng.uniform_int(spec.phrase_min, spec.phrase_max);
          for (int t = 0; t < plen; ++t) {
            const bool marked = spec.morph_mark == "all" ||
                                (spec.morph_mark == "first" && t == 0) ||
                                (spec.morph_mark == "last" && t == plen - 1);
            phrase.push_back((marked ? spec.morph_prefix : "n") +
                             std::to_string(rng.below(1000000)));
          }
        }
        std::string cue =
            spec.cue_words.empty() ? "" : spec.cue_words[rng.below(spec.cue_words.size())];
        place(phrase, cue, label_id);
      }
      int kd = draw_count(spec.decoy_rate + spec.decoys_per_token * len);
      for (int s = 0; s < kd && !spec.cue_words.empty(); ++s) {
        std::vector<std::string> tail;
        const int tlen = rng.uniform_int(spec.decoy_min, spec.decoy_max);
        for (int t = 0; t < tlen; ++t)
          tail.push_back(
              spec.decoy_fresh_prefix.empty()
                  ? "f" + std::to_string(rng.below(static_cast<std::uint64_t>(cfg.filler_vocab)))
                  : spec.decoy_fresh_prefix + std::to_string(rng.below(1000000)));
        place(tail, spec.cue_words[rng.below(spec.cue_words.size())], -1);
      }
    }

    if (with_pos)
      for (auto& tok : seq.tokens) tok.pos_tag = pseudo_pos(tok.text);
    out.dataset.sequences.push_back(std::move(seq));
  }
  out.dataset.validate();
  return out;
}

inline std::string lexicon_file_content(const std::vector<std::vector<std::string>>& phrases) {
  std::ostringstream out;
  for (const auto& p : phrases) {
    for (std::size_t i = 0; i < p.size(); ++i) out << (i ? " " : "") << p[i];
    out << "\n";
  }
  return out.str();
}

}  // namespace hybridseq::corpus
