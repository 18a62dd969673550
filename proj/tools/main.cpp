// hybridseq command-line tool: data prep, training, prediction, evaluation,
// crowd-label aggregation, hyperparameter search, and potential-score
// analysis. One JSON config per run; subcommand outputs land in --out.
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 numeric failure,
// 5 checkpoint/vocabulary mismatch.

#include <chrono>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "hybridseq/hybridseq.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace hybridseq;

namespace {

// ---------------------------------------------------------------------------
// small output helpers

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  return out + "\"";
}

struct ManifestBuilder {
  std::string command;
  std::string config_path;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_hashes;
  std::vector<std::string> output_paths;
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();

  void add_input(const std::string& path) {
    if (!path.empty() && fs::exists(path)) input_hashes[path] = hash_file(path);
  }
  void add_output(const std::string& path) { output_paths.push_back(path); }

  void write(const std::string& out_dir) {
    json j;
    j["command"] = command;
    j["config_path"] = config_path;
    j["seed"] = seed;
    j["input_hashes"] = input_hashes;
    std::sort(output_paths.begin(), output_paths.end());
    j["output_paths"] = output_paths;
    j["toolkit_version"] = kToolkitVersion;
    j["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_file_atomic((fs::path(out_dir) / "manifest.json").string(), j.dump(2) + "\n");
  }
};

std::string resolve_path(const std::string& p, const std::string& base_dir) {
  fs::path fp(p);
  if (fp.is_absolute() || base_dir.empty()) return p;
  return (fs::path(base_dir) / fp).lexically_normal().string();
}

// ---------------------------------------------------------------------------
// run configs with variant profiles

struct RunConfig {
  json raw;
  std::string base_dir;
  model::VariantSpec variant;
  training::TrainingConfig train_cfg;
  featurizer::FeaturizerConfig feat_cfg;
  json feat_cfg_json;
  std::string train_path, test_path, embeddings_path;
  corpus::Format format = corpus::Format::kJsonl;
  training::SearchSpace space;
  int search_folds = 5;
  std::uint64_t search_seed = 1;
  std::string output_dir = "out";
};

// Table-style defaults per variant profile.
json profile_defaults(const std::string& name) {
  json j;
  if (name == "rand-lstm-crf") {
    j["model"] = {{"embedding", "random_static"}, {"use_hb", false}, {"use_lstm", true}};
    j["training"] = {{"eta", 1e-4}};
    j["search"] = {{"range_c1", {0.0, 3e-5, 1e-4, 3e-4, 1e-3}},
                   {"range_c2", {0.0, 3e-4, 1e-3, 3e-3, 1e-2}}};
  } else if (name == "hb-crf") {
    j["model"] = {{"embedding", "none"}, {"use_hb", true}, {"use_lstm", false}};
    j["training"] = {{"eta", 1e-2}};
    j["search"] = {{"range_c1", {0.0, 3e-6, 1e-5, 3e-5, 1e-4}},
                   {"range_c2", {0.0, 3e-5, 1e-4, 3e-4, 1e-3}}};
  } else if (name == "elmo-lstm-crf") {
    j["model"] = {{"embedding", "precomputed_contextual"}, {"use_hb", false}, {"use_lstm", true}};
    j["training"] = {{"eta", 1e-3}};
    j["search"] = {{"range_c1", {0.0, 3e-5, 1e-4, 3e-4, 1e-3}},
                   {"range_c2", {0.0, 3e-4, 1e-3, 3e-3, 1e-2}}};
  } else if (name == "elmo-lstm-crf-hb") {
    j["model"] = {{"embedding", "precomputed_contextual"}, {"use_hb", true}, {"use_lstm", true}};
    j["training"] = {{"eta", 1e-3}};
    j["search"] = {{"range_c1", {0.0, 3e-7, 1e-6, 3e-6, 1e-5}},
                   {"range_c2", {0.0, 3e-6, 1e-5, 3e-5, 1e-4}}};
  } else {
    throw ConfigError("unknown profile '" + name + "'");
  }
  return j;
}

void merge_json(json& base, const json& over) {
  for (auto it = over.begin(); it != over.end(); ++it) {
    if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object())
      merge_json(base[it.key()], *it);
    else
      base[it.key()] = *it;
  }
}

RunConfig load_run_config(const std::string& path) {
  RunConfig rc;
  json user;
  try {
    user = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("cannot parse config " + path + ": " + e.what());
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  rc.base_dir = fs::path(path).parent_path().string();

  json merged;
  if (user.contains("profile"))
    merged = profile_defaults(user.at("profile").get<std::string>());
  merge_json(merged, user);
  rc.raw = merged;

  try {
    const json m = merged.value("model", json::object());
    rc.variant.embedding =
        model::source_kind_from_name(m.value("embedding", std::string("none")));
    rc.variant.use_hb = m.value("use_hb", true);
    rc.variant.use_lstm = m.value("use_lstm", false);
    rc.variant.decoder =
        m.value("decoder", std::string("crf")) == "softmax" ? model::Decoder::kSoftmax
                                                            : model::Decoder::kCrf;
    rc.variant.emb_dim = m.value("emb_dim", 24);
    rc.variant.hidden_dim = m.value("hidden_dim", 32);
    rc.variant.compressed_dim = m.value("compressed_dim", 64);
    rc.variant.dropout_lstm = m.value("dropout_lstm", false);

    const json t = merged.value("training", json::object());
    rc.train_cfg.eta = t.value("eta", 1e-3);
    rc.train_cfg.c1 = t.value("c1", 0.0);
    rc.train_cfg.c2 = t.value("c2", 0.0);
    rc.train_cfg.beta1 = t.value("beta1", 0.9);
    rc.train_cfg.beta2 = t.value("beta2", 0.999);
    rc.train_cfg.eps = t.value("eps", 1e-8);
    rc.train_cfg.batch_size = t.value("batch_size", 16);
    rc.train_cfg.dropout = t.value("dropout", 0.5);
    rc.train_cfg.epochs = t.value("epochs", 10);
    rc.train_cfg.seed = t.value("seed", 42ull);

    if (merged.contains("featurizer")) {
      rc.feat_cfg_json = merged.at("featurizer");
      rc.feat_cfg = featurizer::featurizer_config_from_json(rc.feat_cfg_json, rc.base_dir);
      // store resolved paths so checkpoints can reload them from anywhere
      rc.feat_cfg_json["cue_lexicons"] = rc.feat_cfg.cue_lexicon_paths;
      rc.feat_cfg_json["span_lexicons"] = rc.feat_cfg.span_lexicon_paths;
    }

    const json d = merged.value("data", json::object());
    if (d.contains("train")) rc.train_path = resolve_path(d.at("train").get<std::string>(), rc.base_dir);
    if (d.contains("test")) rc.test_path = resolve_path(d.at("test").get<std::string>(), rc.base_dir);
    if (d.contains("embeddings"))
      rc.embeddings_path = resolve_path(d.at("embeddings").get<std::string>(), rc.base_dir);
    rc.format = d.value("format", std::string("jsonl")) == "conll" ? corpus::Format::kConll
                                                                   : corpus::Format::kJsonl;

    if (merged.contains("search")) {
      const json s = merged.at("search");
      rc.space.range_c1 = s.value("range_c1", std::vector<double>{0.0});
      rc.space.range_c2 = s.value("range_c2", std::vector<double>{0.0});
      rc.space.n_settings = s.value("n_settings", 10);
      rc.search_folds = s.value("folds", 5);
      rc.search_seed = s.value("seed", 1ull);
    }
    rc.output_dir = merged.value("output_dir", std::string("out"));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad run config: ") + e.what());
  }
  return rc;
}

// Embedding artifacts named by a run config.
struct LoadedEmbeddings {
  std::optional<embeddings::StaticEmbeddingTable> table;
  std::optional<embeddings::ContextualEmbeddingStore> store;

  void load_for(const model::VariantSpec& variant, const std::string& path) {
    if (variant.embedding == embeddings::SourceKind::kPretrainedStatic) {
      if (path.empty()) throw ConfigError("config key data.embeddings required for pretrained_static");
      table = embeddings::load_static_embeddings(path);
    } else if (variant.embedding == embeddings::SourceKind::kPrecomputedContextual) {
      if (path.empty())
        throw ConfigError("config key data.embeddings required for precomputed_contextual");
      store = embeddings::load_contextual_store(path);
    }
  }

  training::TrainArtifacts artifacts(const featurizer::FeaturizerConfig* fc,
                                     const featurizer::FeatureVocabulary* vocab) const {
    training::TrainArtifacts a;
    a.feat_cfg = fc;
    a.vocab = vocab;
    a.pretrained = table ? &*table : nullptr;
    a.store = store ? &*store : nullptr;
    return a;
  }
};

// ---------------------------------------------------------------------------
// minimal static SVG plots

std::string svg_line_plot(const std::vector<std::size_t>& edges,
                          const std::map<std::string, std::vector<std::optional<double>>>& curves) {
  const int width = 640, height = 400, margin = 50;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
      << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
  svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
      << height - margin << "\" stroke=\"black\"/>\n";
  const double x_max = static_cast<double>(edges.back());
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b"};
  int color = 0;
  int legend_y = margin;
  for (const auto& [name, values] : curves) {
    std::ostringstream pts;
    for (std::size_t b = 0; b < values.size(); ++b) {
      if (!values[b]) continue;
      const double x_center = (static_cast<double>(edges[b]) + static_cast<double>(edges[b + 1])) / 2.0;
      const double px = margin + x_center / x_max * (width - 2 * margin);
      const double py = height - margin - *values[b] * (height - 2 * margin);
      pts << px << "," << py << " ";
    }
    svg << "<polyline fill=\"none\" stroke=\"" << kColors[color % 5] << "\" stroke-width=\"2\" points=\""
        << pts.str() << "\"/>\n";
    svg << "<text x=\"" << width - margin - 150 << "\" y=\"" << legend_y << "\" fill=\""
        << kColors[color % 5] << "\" font-size=\"13\">" << name << "</text>\n";
    legend_y += 16;
    ++color;
  }
  svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 12
      << "\" font-size=\"13\" text-anchor=\"middle\">token position</text>\n";
  svg << "<text x=\"14\" y=\"" << height / 2
      << "\" font-size=\"13\" transform=\"rotate(-90 14 " << height / 2
      << ")\" text-anchor=\"middle\">macro-F1</text>\n</svg>\n";
  return svg.str();
}

std::string svg_heatmap(const std::vector<std::string>& row_labels,
                        const std::vector<std::vector<double>>& cells,
                        const std::vector<std::string>& col_labels) {
  const int cell_w = 110, cell_h = 36, left = 150, top = 40;
  double lo = 1e300, hi = -1e300;
  for (const auto& row : cells)
    for (double v : row) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (hi <= lo) hi = lo + 1;
  const int width = left + cell_w * static_cast<int>(col_labels.size()) + 20;
  const int height = top + cell_h * static_cast<int>(row_labels.size()) + 20;
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t c = 0; c < col_labels.size(); ++c)
    svg << "<text x=\"" << left + cell_w * static_cast<int>(c) + cell_w / 2 << "\" y=\"" << top - 10
        << "\" font-size=\"13\" text-anchor=\"middle\">" << col_labels[c] << "</text>\n";
  for (std::size_t r = 0; r < row_labels.size(); ++r) {
    svg << "<text x=\"" << left - 8 << "\" y=\"" << top + cell_h * static_cast<int>(r) + cell_h / 2 + 4
        << "\" font-size=\"13\" text-anchor=\"end\">" << row_labels[r] << "</text>\n";
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      const int shade = static_cast<int>(255.0 * (cells[r][c] - lo) / (hi - lo));
      svg << "<rect x=\"" << left + cell_w * static_cast<int>(c) << "\" y=\""
          << top + cell_h * static_cast<int>(r) << "\" width=\"" << cell_w << "\" height=\"" << cell_h
          << "\" fill=\"rgb(" << shade << "," << shade << "," << shade
          << ")\" stroke=\"black\"/>\n";
      const char* text_color = shade < 128 ? "white" : "black";
      svg << "<text x=\"" << left + cell_w * static_cast<int>(c) + cell_w / 2 << "\" y=\""
          << top + cell_h * static_cast<int>(r) + cell_h / 2 + 4
          << "\" font-size=\"12\" text-anchor=\"middle\" fill=\"" << text_color << "\">"
          << fmt_double(cells[r][c], 4) << "</text>\n";
    }
  }
  svg << "</svg>\n";
  return svg.str();
}

// ---------------------------------------------------------------------------
// prediction files: the input dataset mirrored with a "pred" array per record

void write_predictions(const std::string& path, const corpus::Dataset& data,
                       const std::vector<std::vector<int>>& preds,
                       const std::vector<std::string>& label_names) {
  std::ostringstream out;
  json header;
  header["labels"] = data.scheme.labels;
  header["scheme"] = data.scheme.scheme == corpus::Scheme::kFlat ? "flat" : "iob";
  header["other"] = data.scheme.other_label;
  out << header.dump() << "\n";
  for (std::size_t s = 0; s < data.sequences.size(); ++s) {
    const auto& seq = data.sequences[s];
    json j;
    j["doc_id"] = seq.doc_id;
    std::vector<std::string> toks, gold, pred;
    for (const auto& t : seq.tokens) toks.push_back(t.text);
    for (int l : seq.labels) gold.push_back(data.scheme.labels[static_cast<std::size_t>(l)]);
    for (int l : preds[s]) pred.push_back(label_names[static_cast<std::size_t>(l)]);
    j["tokens"] = toks;
    j["labels"] = gold;
    j["pred"] = pred;
    bool any_pos = false;
    for (const auto& t : seq.tokens) any_pos = any_pos || t.pos_tag.has_value();
    if (any_pos) {
      std::vector<std::string> pos;
      for (const auto& t : seq.tokens) pos.push_back(t.pos_tag.value_or("_"));
      j["pos"] = pos;
    } else {
      j["pos"] = nullptr;
    }
    out << j.dump() << "\n";
  }
  write_file(path, out.str());
}

struct PredFile {
  corpus::Dataset data;                 // tokens + gold labels
  std::vector<std::vector<int>> preds;  // label ids into data.scheme
};

PredFile load_predictions(const std::string& path) {
  PredFile pf;
  pf.data = corpus::load_jsonl(path);
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);  // header
  std::size_t s = 0;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json j = json::parse(line);
    if (!j.contains("pred"))
      throw DataError(path + " line " + std::to_string(lineno) + ": missing pred array");
    std::vector<int> ids;
    for (const auto& name : j.at("pred")) {
      int id = pf.data.scheme.label_id(name.get<std::string>());
      if (id < 0)
        throw DataError(path + " line " + std::to_string(lineno) + ": pred label '" +
                        name.get<std::string>() + "' not in scheme");
      ids.push_back(id);
    }
    if (ids.size() != pf.data.sequences[s].size())
      throw DataError(path + " line " + std::to_string(lineno) + ": pred length mismatch");
    pf.preds.push_back(std::move(ids));
    ++s;
  }
  return pf;
}

// ---------------------------------------------------------------------------
// checkpoint-driven prediction plumbing shared by predict/analyze-potentials

struct LoadedModel {
  model::LoadedCheckpoint ckpt;
  featurizer::FeaturizerConfig feat_cfg;
  featurizer::FeatureVocabulary vocab;
  LoadedEmbeddings emb;

  model::EncodingContext context() const {
    return {emb.table ? &*emb.table : nullptr, emb.store ? &*emb.store : nullptr};
  }
};

LoadedModel load_model(const std::string& ckpt_path, const std::string& vocab_override,
                       const std::string& embeddings_override) {
  LoadedModel lm;
  lm.ckpt = model::load_checkpoint(read_file(ckpt_path));
  const json& header = lm.ckpt.header;
  const auto& variant = lm.ckpt.model.variant;
  if (variant.use_hb) {
    std::string vocab_path =
        !vocab_override.empty() ? vocab_override : header.value("vocab_path", std::string());
    if (vocab_path.empty()) throw ConfigError("checkpoint needs a vocabulary file (--vocab)");
    lm.vocab = featurizer::FeatureVocabulary::from_tsv(read_file(vocab_path));
    const std::string got = hex64(lm.vocab.content_hash());
    const std::string want = header.value("vocab_hash", std::string());
    if (got != want)
      throw CheckpointMismatchError("vocabulary hash mismatch: checkpoint expects " + want +
                                    " but " + vocab_path + " hashes to " + got);
    lm.feat_cfg = featurizer::featurizer_config_from_json(header.at("featurizer"));
  }
  std::string emb_path = !embeddings_override.empty()
                             ? embeddings_override
                             : header.value("embedding_path", std::string());
  lm.emb.load_for(variant, emb_path);
  return lm;
}

// ---------------------------------------------------------------------------
// subcommands

int cmd_synth(const std::string& config_path, const std::string& out_dir, std::uint64_t seed,
              int n_train, int n_test) {
  ManifestBuilder manifest;
  manifest.command = "synth";
  manifest.config_path = config_path;
  manifest.seed = seed;
  manifest.add_input(config_path);
  fs::create_directories(out_dir);

  json j = json::parse(read_file(config_path));
  auto gcfg = corpus::generator_config_from_json(j);
  if (n_train > 0) gcfg.n_sequences = n_train + n_test;
  auto out = corpus::generate_synthetic(gcfg, seed);

  corpus::Dataset all = out.dataset;
  if (n_test > 0) {
    corpus::Dataset train = all, test = all;
    train.sequences.assign(all.sequences.begin(), all.sequences.begin() + n_train);
    test.sequences.assign(all.sequences.begin() + n_train, all.sequences.end());
    const std::string train_path = (fs::path(out_dir) / "train.jsonl").string();
    const std::string test_path = (fs::path(out_dir) / "test.jsonl").string();
    corpus::write_dataset(train_path, train, corpus::Format::kJsonl);
    corpus::write_dataset(test_path, test, corpus::Format::kJsonl);
    manifest.add_output(train_path);
    manifest.add_output(test_path);
  } else {
    const std::string data_path = (fs::path(out_dir) / "data.jsonl").string();
    corpus::write_dataset(data_path, all, corpus::Format::kJsonl);
    manifest.add_output(data_path);
  }

  std::vector<std::string> span_lexicons, cue_lexicons;
  for (const auto& [label, phrases] : out.lexicons) {
    if (phrases.empty()) continue;
    const std::string lex_path = (fs::path(out_dir) / ("lexicon_" + label + ".txt")).string();
    write_file(lex_path, corpus::lexicon_file_content(phrases));
    span_lexicons.push_back(lex_path);
    manifest.add_output(lex_path);
  }
  for (const auto& spec : gcfg.labels) {
    if (spec.cue_words.empty()) continue;
    std::string content = "window=4\n";
    for (const auto& c : spec.cue_words) content += c + "\n";
    const std::string cue_path = (fs::path(out_dir) / ("cues_" + spec.name + ".txt")).string();
    write_file(cue_path, content);
    cue_lexicons.push_back(cue_path);
    manifest.add_output(cue_path);
  }

  auto store = embeddings::make_pseudo_contextual_store(
      all, gcfg.embedding_dim, splitmix64(seed ^ 0xe3b), gcfg.embedding_noise_after,
      gcfg.embedding_noise_scale);
  const std::string store_path = (fs::path(out_dir) / "embeddings.jsonl").string();
  write_file(store_path, embeddings::contextual_to_jsonl(store));
  manifest.add_output(store_path);

  json feat;
  feat["word_window"] = 4;
  feat["pos_window"] = 4;
  feat["orthography"] = true;
  feat["cue_lexicons"] = cue_lexicons;
  feat["span_lexicons"] = span_lexicons;
  const std::string feat_path = (fs::path(out_dir) / "featurizer.json").string();
  write_file(feat_path, feat.dump(2) + "\n");
  manifest.add_output(feat_path);

  manifest.write(out_dir);
  std::cout << "synthetic corpus written to " << out_dir << " (" << all.sequences.size()
            << " sequences)\n";
  return 0;
}

int cmd_featurize(const std::string& config_path, const std::string& data_path,
                  const std::string& out_dir) {
  ManifestBuilder manifest;
  manifest.command = "featurize";
  manifest.config_path = config_path;
  manifest.add_input(config_path);
  manifest.add_input(data_path);
  fs::create_directories(out_dir);

  json j = json::parse(read_file(config_path));
  const json feat_json = j.contains("featurizer") ? j.at("featurizer") : j;
  auto cfg = featurizer::featurizer_config_from_json(feat_json,
                                                     fs::path(config_path).parent_path().string());
  auto data = corpus::load_dataset(data_path, corpus::Format::kJsonl);
  auto vocab = featurizer::build_vocabulary(data, cfg);
  const std::string vocab_path = (fs::path(out_dir) / "vocab.tsv").string();
  write_file(vocab_path, vocab.to_tsv());
  manifest.add_output(vocab_path);
  manifest.write(out_dir);
  std::cout << "vocabulary of " << vocab.size() << " features -> " << vocab_path << "\n";
  return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_override,
              std::optional<std::uint64_t> seed_override) {
  RunConfig rc = load_run_config(config_path);
  if (!out_override.empty()) rc.output_dir = out_override;
  if (seed_override) rc.train_cfg.seed = *seed_override;
  if (rc.train_path.empty()) throw ConfigError("config key data.train is required");

  ManifestBuilder manifest;
  manifest.command = "train";
  manifest.config_path = config_path;
  manifest.seed = rc.train_cfg.seed;
  manifest.add_input(config_path);
  manifest.add_input(rc.train_path);
  manifest.add_input(rc.embeddings_path);
  for (const auto& p : rc.feat_cfg.cue_lexicon_paths) manifest.add_input(p);
  for (const auto& p : rc.feat_cfg.span_lexicon_paths) manifest.add_input(p);
  fs::create_directories(rc.output_dir);

  log_info("loading training data from " + rc.train_path);
  auto data = corpus::load_dataset(rc.train_path, rc.format);
  LoadedEmbeddings emb;
  emb.load_for(rc.variant, rc.embeddings_path);

  featurizer::FeatureVocabulary vocab;
  std::string vocab_path;
  if (rc.variant.use_hb) {
    if (rc.feat_cfg_json.is_null()) throw ConfigError("HB variants need a featurizer config");
    vocab = featurizer::build_vocabulary(data, rc.feat_cfg);
    vocab_path = (fs::path(rc.output_dir) / "vocab.tsv").string();
    write_file(vocab_path, vocab.to_tsv());
    manifest.add_output(vocab_path);
  }

  auto art = emb.artifacts(rc.variant.use_hb ? &rc.feat_cfg : nullptr,
                           rc.variant.use_hb ? &vocab : nullptr);
  log_info("training " + std::to_string(data.sequences.size()) + " sequences for " +
           std::to_string(rc.train_cfg.epochs) + " epochs");
  auto result = training::train(data, rc.variant, rc.train_cfg, art);

  std::ostringstream trace;
  trace << "epoch,mean_nll\n";
  for (std::size_t e = 0; e < result.epoch_mean_nll.size(); ++e)
    trace << e << "," << fmt_double(result.epoch_mean_nll[e], 17) << "\n";
  const std::string trace_path = (fs::path(rc.output_dir) / "loss_trace.csv").string();
  write_file(trace_path, trace.str());
  manifest.add_output(trace_path);

  model::CheckpointExtras extras;
  extras.vocab_hash = rc.variant.use_hb ? hex64(vocab.content_hash()) : "";
  extras.vocab_path = vocab_path.empty() ? "" : fs::absolute(vocab_path).string();
  extras.embedding_path = rc.embeddings_path.empty() ? "" : fs::absolute(rc.embeddings_path).string();
  extras.featurizer_config = rc.feat_cfg_json;
  if (rc.variant.embedding == embeddings::SourceKind::kRandomStatic) {
    extras.emb_words.resize(result.model.emb_table.vocab.size());
    for (const auto& [w, r] : result.model.emb_table.vocab)
      extras.emb_words[static_cast<std::size_t>(r)] = w;
  }
  const std::string ckpt_path = (fs::path(rc.output_dir) / "checkpoint.hyb").string();
  write_file(ckpt_path, model::save_checkpoint(result.model, extras));
  manifest.add_output(ckpt_path);
  manifest.write(rc.output_dir);
  std::cout << "trained " << result.epoch_mean_nll.size() << " epochs";
  if (!result.epoch_mean_nll.empty())
    std::cout << ", final mean NLL " << fmt_double(result.epoch_mean_nll.back(), 6);
  std::cout << " -> " << ckpt_path << "\n";
  return 0;
}

int cmd_predict(const std::string& ckpt_path, const std::string& data_path,
                const std::string& out_path, const std::string& vocab_override,
                const std::string& embeddings_override) {
  LoadedModel lm = load_model(ckpt_path, vocab_override, embeddings_override);
  log_info("decoding with checkpoint " + ckpt_path);
  auto data = corpus::load_dataset(data_path, corpus::Format::kJsonl);
  if (data.scheme.labels != lm.ckpt.model.labels)
    throw DataError("dataset label scheme does not match the checkpoint");
  auto preds = training::predict_dataset(lm.ckpt.model, lm.context(), data,
                                         lm.ckpt.model.variant.use_hb ? &lm.feat_cfg : nullptr,
                                         lm.ckpt.model.variant.use_hb ? &lm.vocab : nullptr);
  if (!out_path.empty() && fs::path(out_path).has_parent_path())
    fs::create_directories(fs::path(out_path).parent_path());
  write_predictions(out_path, data, preds, lm.ckpt.model.labels);
  std::cout << "predicted " << data.sequences.size() << " sequences -> " << out_path << "\n";
  return 0;
}

int cmd_evaluate(const std::string& gold_path, const std::string& pred_path,
                 const std::string& compare_path, const std::string& out_dir, bool chunks,
                 int bins, bool svg) {
  ManifestBuilder manifest;
  manifest.command = "evaluate";
  manifest.add_input(gold_path);
  manifest.add_input(pred_path);
  manifest.add_input(compare_path);
  fs::create_directories(out_dir);

  auto gold = corpus::load_dataset(gold_path, corpus::Format::kJsonl);
  auto pred = load_predictions(pred_path);
  if (gold.sequences.size() != pred.data.sequences.size())
    throw DataError("gold and prediction files have different sequence counts");
  std::vector<std::vector<int>> gold_labels, pred_labels;
  for (std::size_t s = 0; s < gold.sequences.size(); ++s) {
    if (gold.sequences[s].doc_id != pred.data.sequences[s].doc_id)
      throw DataError("alignment failure at doc '" + gold.sequences[s].doc_id + "' vs '" +
                      pred.data.sequences[s].doc_id + "'");
    gold_labels.push_back(gold.sequences[s].labels);
    pred_labels.push_back(pred.preds[s]);
  }

  auto report = evaluation::token_macro_f1(gold_labels, pred_labels, gold.scheme.labels);
  json jr;
  jr["macro_f1"] = report.macro_f1;
  json per_label = json::object();
  std::ostringstream csv;
  csv << "label,precision,recall,f1,support\n";
  for (std::size_t l = 0; l < report.labels.size(); ++l) {
    const auto& m = report.per_label[l];
    per_label[report.labels[l]] = {{"precision", m.precision},
                                   {"recall", m.recall},
                                   {"f1", m.f1},
                                   {"support", m.support}};
    csv << csv_field(report.labels[l]) << "," << fmt_double(m.precision) << ","
        << fmt_double(m.recall) << "," << fmt_double(m.f1) << "," << m.support << "\n";
  }
  jr["per_label"] = per_label;
  const std::string token_json = (fs::path(out_dir) / "token_report.json").string();
  const std::string token_csv = (fs::path(out_dir) / "token_report.csv").string();
  write_file(token_json, jr.dump(2) + "\n");
  write_file(token_csv, csv.str());
  manifest.add_output(token_json);
  manifest.add_output(token_csv);

  if (chunks) {
    if (gold.scheme.scheme != corpus::Scheme::kFlat)
      throw ConfigError("chunk evaluation requires a flat scheme; run iob collapse first");
    std::vector<std::vector<corpus::Chunk>> gc, pc;
    const int other = gold.scheme.other_id();
    for (std::size_t s = 0; s < gold_labels.size(); ++s) {
      gc.push_back(corpus::chunks_from_label_ids(gold_labels[s], other));
      pc.push_back(corpus::chunks_from_label_ids(pred_labels[s], other));
    }
    auto cr = evaluation::approx_chunk_f1(gc, pc);
    json jc{{"tp", cr.tp},     {"fp", cr.fp},         {"fn", cr.fn},
            {"precision", cr.precision}, {"recall", cr.recall}, {"f1", cr.f1}};
    const std::string chunk_json = (fs::path(out_dir) / "chunk_report.json").string();
    write_file(chunk_json, jc.dump(2) + "\n");
    manifest.add_output(chunk_json);
  }

  if (bins > 0) {
    std::size_t max_len = 0;
    for (const auto& g : gold_labels) max_len = std::max(max_len, g.size());
    auto edges = evaluation::default_bin_edges(max_len, static_cast<std::size_t>(bins));
    auto bucket = evaluation::position_bucket_f1(gold_labels, pred_labels, edges,
                                                 gold.scheme.labels);
    std::ostringstream bcsv;
    bcsv << "bin_start,bin_end,token_count,macro_f1\n";
    for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
      bcsv << edges[b] << "," << edges[b + 1] << "," << bucket.token_counts[b] << ",";
      bcsv << (bucket.macro_f1[b] ? fmt_double(*bucket.macro_f1[b]) : "") << "\n";
    }
    const std::string bucket_csv = (fs::path(out_dir) / "position_buckets.csv").string();
    write_file(bucket_csv, bcsv.str());
    manifest.add_output(bucket_csv);
    if (svg) {
      std::map<std::string, std::vector<std::optional<double>>> curves{{"model", bucket.macro_f1}};
      const std::string svg_path = (fs::path(out_dir) / "position_buckets.svg").string();
      write_file(svg_path, svg_line_plot(edges, curves));
      manifest.add_output(svg_path);
    }
  }

  if (!compare_path.empty()) {
    auto base = load_predictions(compare_path);
    std::vector<std::vector<int>> base_labels;
    for (std::size_t s = 0; s < base.preds.size(); ++s) base_labels.push_back(base.preds[s]);
    auto base_report = evaluation::token_macro_f1(gold_labels, base_labels, gold.scheme.labels);
    auto improvements = evaluation::label_improvement(report, base_report);
    std::ostringstream icsv;
    icsv << "label,f1,base_f1,improvement\n";
    for (std::size_t l = 0; l < improvements.size(); ++l) {
      icsv << csv_field(improvements[l].first) << "," << fmt_double(report.per_label[l].f1) << ","
           << fmt_double(base_report.per_label[l].f1) << ",";
      if (improvements[l].second)
        icsv << fmt_double(*improvements[l].second * 100.0, 6) << "%";
      else
        icsv << "—";  // em-dash sentinel for zero-base labels
      icsv << "\n";
    }
    const std::string imp_csv = (fs::path(out_dir) / "improvement.csv").string();
    write_file(imp_csv, icsv.str());
    manifest.add_output(imp_csv);
  }

  manifest.write(out_dir);
  std::cout << "macro_f1 " << fmt_double(report.macro_f1, 6) << " -> " << out_dir << "\n";
  return 0;
}

int cmd_aggregate(const std::string& annotations_path, const std::string& gold_path,
                  const std::string& out_dir, int max_iters, double tol) {
  ManifestBuilder manifest;
  manifest.command = "aggregate";
  manifest.add_input(annotations_path);
  manifest.add_input(gold_path);
  fs::create_directories(out_dir);

  auto parsed = crowd::parse_annotation_csv(read_file(annotations_path));
  const int L = static_cast<int>(parsed.label_names.size());
  if (L < 2) throw DataError("annotations carry fewer than two distinct labels");
  auto result = crowd::dawid_skene_em(parsed.matrix, L, max_iters, tol);
  auto hard = crowd::infer_hard_labels(result);

  std::ostringstream pcsv;
  pcsv << "item_id";
  for (const auto& l : parsed.label_names) pcsv << "," << csv_field("p_" + l);
  pcsv << ",hard_label\n";
  for (std::size_t i = 0; i < parsed.matrix.items.size(); ++i) {
    pcsv << csv_field(parsed.matrix.items[i]);
    for (int l = 0; l < L; ++l)
      pcsv << "," << fmt_double(result.posteriors[i][static_cast<std::size_t>(l)]);
    pcsv << "," << csv_field(parsed.label_names[static_cast<std::size_t>(hard[i])]) << "\n";
  }
  const std::string post_path = (fs::path(out_dir) / "posteriors.csv").string();
  write_file(post_path, pcsv.str());
  manifest.add_output(post_path);

  json jc;
  jc["labels"] = parsed.label_names;
  jc["iterations"] = result.iterations;
  jc["converged"] = result.converged;
  jc["class_priors"] = result.class_priors;
  jc["log_likelihood_trace"] = result.log_likelihood_trace;
  json confusions = json::object();
  for (std::size_t a = 0; a < parsed.matrix.annotators.size(); ++a) {
    std::vector<std::vector<double>> rows;
    for (int l = 0; l < L; ++l) {
      std::vector<double> row;
      for (int k = 0; k < L; ++k)
        row.push_back(result.confusions[a](static_cast<std::size_t>(l), static_cast<std::size_t>(k)));
      rows.push_back(row);
    }
    confusions[parsed.matrix.annotators[a]] = rows;
  }
  jc["confusions"] = confusions;
  const std::string conf_path = (fs::path(out_dir) / "confusions.json").string();
  write_file(conf_path, jc.dump(2) + "\n");
  manifest.add_output(conf_path);

  if (!gold_path.empty()) {
    std::map<std::string, int> inferred, expert;
    for (std::size_t i = 0; i < parsed.matrix.items.size(); ++i)
      inferred[parsed.matrix.items[i]] = hard[i];
    auto lines = split_on(read_file(gold_path), '\n');
    bool header = true;
    for (const auto& raw : lines) {
      std::string line = trim(raw);
      if (line.empty()) continue;
      if (header) {
        header = false;
        continue;
      }
      auto cols = split_on(line, ',');
      if (cols.size() != 2) throw DataError(gold_path + ": expected item_id,label");
      int id = -1;
      for (std::size_t l = 0; l < parsed.label_names.size(); ++l)
        if (parsed.label_names[l] == trim(cols[1])) id = static_cast<int>(l);
      if (id < 0) throw DataError(gold_path + ": unknown label '" + cols[1] + "'");
      expert[trim(cols[0])] = id;
    }
    std::map<std::string, int> inferred_common;
    for (const auto& [item, label] : expert) {
      auto it = inferred.find(item);
      if (it == inferred.end()) throw DataError("gold item not in annotations: " + item);
      inferred_common[item] = it->second;
    }
    auto agr = crowd::agreement(inferred_common, expert);
    json ja;
    ja["items"] = expert.size();
    ja["raw_agreement"] = agr.raw;
    if (agr.kappa)
      ja["cohens_kappa"] = *agr.kappa;
    else
      ja["cohens_kappa"] = nullptr;
    const std::string agr_path = (fs::path(out_dir) / "agreement.json").string();
    write_file(agr_path, ja.dump(2) + "\n");
    manifest.add_output(agr_path);
  }

  manifest.write(out_dir);
  std::cout << "aggregated " << parsed.matrix.items.size() << " items over "
            << parsed.matrix.annotators.size() << " annotators -> " << out_dir << "\n";
  return 0;
}

int cmd_search(const std::string& config_path, const std::string& out_override,
               std::optional<std::uint64_t> seed_override, int threads) {
  RunConfig rc = load_run_config(config_path);
  if (!out_override.empty()) rc.output_dir = out_override;
  if (seed_override) rc.search_seed = *seed_override;
  if (rc.train_path.empty()) throw ConfigError("config key data.train is required");
  if (!rc.raw.contains("search")) throw ConfigError("config key search is required");

  ManifestBuilder manifest;
  manifest.command = "search";
  manifest.config_path = config_path;
  manifest.seed = rc.search_seed;
  manifest.add_input(config_path);
  manifest.add_input(rc.train_path);
  manifest.add_input(rc.embeddings_path);
  fs::create_directories(rc.output_dir);

  auto data = corpus::load_dataset(rc.train_path, rc.format);
  LoadedEmbeddings emb;
  emb.load_for(rc.variant, rc.embeddings_path);
  training::ProtocolArtifacts art;
  art.feat_cfg = rc.variant.use_hb ? &rc.feat_cfg : nullptr;
  art.pretrained = emb.table ? &*emb.table : nullptr;
  art.store = emb.store ? &*emb.store : nullptr;

  auto folds = corpus::make_folds(data, rc.search_folds, rc.search_seed);
  auto result = training::random_search(data, rc.variant, rc.train_cfg, rc.space, folds,
                                        rc.search_seed, art, nullptr, threads);

  std::ostringstream csv;
  csv << "c1,c2";
  for (int f = 0; f < rc.search_folds; ++f) csv << ",fold" << f << "_f1";
  csv << ",mean_f1\n";
  for (const auto& row : result.rows) {
    csv << fmt_double(row.c1, 17) << "," << fmt_double(row.c2, 17);
    for (double f : row.fold_f1) csv << "," << fmt_double(f, 17);
    csv << "," << fmt_double(row.mean_f1, 17) << "\n";
  }
  const std::string settings_path = (fs::path(rc.output_dir) / "settings.csv").string();
  write_file(settings_path, csv.str());
  manifest.add_output(settings_path);

  json derived = rc.raw;
  derived["training"]["c1"] = result.best_c1;
  derived["training"]["c2"] = result.best_c2;
  derived.erase("search");
  const std::string derived_path = (fs::path(rc.output_dir) / "best_config.json").string();
  write_file(derived_path, derived.dump(2) + "\n");
  manifest.add_output(derived_path);

  manifest.write(rc.output_dir);
  std::cout << "best c1=" << fmt_double(result.best_c1, 17)
            << " c2=" << fmt_double(result.best_c2, 17) << " -> " << derived_path << "\n";
  return 0;
}

int cmd_analyze_potentials(const std::string& ckpt_path, const std::string& data_path,
                           const std::string& out_dir, const std::string& vocab_override,
                           const std::string& embeddings_override, bool svg) {
  LoadedModel lm = load_model(ckpt_path, vocab_override, embeddings_override);
  const auto& m = lm.ckpt.model;
  if (!(m.variant.use_lstm && m.variant.use_hb))
    throw ConfigError("potential decomposition needs a combined (LSTM + HB) checkpoint");

  ManifestBuilder manifest;
  manifest.command = "analyze-potentials";
  manifest.add_input(ckpt_path);
  manifest.add_input(data_path);
  fs::create_directories(out_dir);

  auto data = corpus::load_dataset(data_path, corpus::Format::kJsonl);
  std::vector<evaluation::PotentialRow> rows;
  std::ostringstream csv;
  csv << "doc_id,token_index,label,phi_total,phi_lstm,phi_hb\n";
  for (const auto& seq : data.sequences) {
    auto in = model::prepare_input(m, seq, &lm.feat_cfg, &lm.vocab);
    auto st = model::forward_potentials(m, lm.context(), in, neural::DropoutMode::kInference, 0.0,
                                        nullptr);
    auto dec = crf::decompose_potentials(st.fused, m.proj);
    for (std::size_t t = 0; t < seq.size(); ++t)
      for (std::size_t l = 0; l < m.labels.size(); ++l) {
        evaluation::PotentialRow row{seq.doc_id, t, m.labels[l], st.phi(t, l), dec.lstm(t, l),
                                     dec.hb(t, l)};
        rows.push_back(row);
        csv << csv_field(row.doc_id) << "," << t << "," << csv_field(row.label) << ","
            << fmt_double(row.phi_total, 17) << "," << fmt_double(row.phi_lstm, 17) << ","
            << fmt_double(row.phi_hb, 17) << "\n";
      }
  }
  const std::string dump_path = (fs::path(out_dir) / "potentials.csv").string();
  write_file(dump_path, csv.str());
  manifest.add_output(dump_path);

  auto summary = evaluation::potential_summary(rows);
  std::ostringstream scsv;
  scsv << "source,mean,max\n";
  scsv << "lstm," << fmt_double(summary.mean_lstm, 17) << "," << fmt_double(summary.max_lstm, 17)
       << "\n";
  scsv << "hb," << fmt_double(summary.mean_hb, 17) << "," << fmt_double(summary.max_hb, 17) << "\n";
  const std::string summary_path = (fs::path(out_dir) / "summary.csv").string();
  write_file(summary_path, scsv.str());
  manifest.add_output(summary_path);

  std::ostringstream hcsv;
  hcsv << "label,mean_phi_lstm,mean_phi_hb\n";
  for (std::size_t l = 0; l < summary.labels.size(); ++l)
    hcsv << csv_field(summary.labels[l]) << "," << fmt_double(summary.label_mean_lstm[l], 17)
         << "," << fmt_double(summary.label_mean_hb[l], 17) << "\n";
  const std::string heatmap_path = (fs::path(out_dir) / "heatmap.csv").string();
  write_file(heatmap_path, hcsv.str());
  manifest.add_output(heatmap_path);

  if (svg) {
    std::vector<std::vector<double>> cells;
    for (std::size_t l = 0; l < summary.labels.size(); ++l)
      cells.push_back({summary.label_mean_lstm[l], summary.label_mean_hb[l]});
    const std::string svg_path = (fs::path(out_dir) / "heatmap.svg").string();
    write_file(svg_path, svg_heatmap(summary.labels, cells, {"LSTM", "HB"}));
    manifest.add_output(svg_path);
  }

  manifest.write(out_dir);
  std::cout << "potential dump of " << rows.size() << " cells -> " << dump_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybridseq: hybrid LSTM-CRF sequence labeling toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_path, ckpt_path, vocab_path, embeddings_path;
  std::string gold_path, pred_path, compare_path, annotations_path, out_path;
  std::uint64_t seed = 0;
  bool seed_given = false;
  int threads = 1;
  bool chunks = false, svg = false;
  int bins = 0, n_train = 0, n_test = 0;
  int max_iters = 200;
  double tol = 1e-8;

  auto add_seed = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "seed for all randomness")->each([&](const std::string&) {
      seed_given = true;
    });
  };

  auto* synth = app.add_subcommand("synth", "generate a synthetic corpus with its artifacts");
  synth->add_option("--config", config_path, "generator config JSON")->required();
  synth->add_option("--out", out_dir, "output directory")->required();
  synth->add_option("--train", n_train, "training sequences to emit");
  synth->add_option("--test", n_test, "test sequences to emit");
  add_seed(synth);

  auto* featurize = app.add_subcommand("featurize", "build a frozen feature vocabulary");
  featurize->add_option("--config", config_path, "featurizer or run config JSON")->required();
  featurize->add_option("--data", data_path, "dataset (jsonl)")->required();
  featurize->add_option("--out", out_dir, "output directory")->required();

  auto* train = app.add_subcommand("train", "train a model from a run config");
  train->add_option("--config", config_path, "run config JSON")->required();
  train->add_option("--out", out_dir, "output directory (overrides config)");
  add_seed(train);

  auto* predict = app.add_subcommand("predict", "decode a dataset with a checkpoint");
  predict->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  predict->add_option("--data", data_path, "dataset (jsonl)")->required();
  predict->add_option("--out", out_path, "output predictions jsonl")->required();
  predict->add_option("--vocab", vocab_path, "vocabulary tsv (defaults to checkpoint metadata)");
  predict->add_option("--embeddings", embeddings_path, "embedding store/table override");

  auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold labels");
  evaluate->add_option("--gold", gold_path, "gold dataset (jsonl)")->required();
  evaluate->add_option("--pred", pred_path, "prediction file from `predict`")->required();
  evaluate->add_option("--compare", compare_path, "baseline prediction file for improvements");
  evaluate->add_option("--out", out_dir, "output directory")->required();
  evaluate->add_flag("--chunks", chunks, "emit approximate chunk-match report");
  evaluate->add_option("--bins", bins, "emit position-bucket report with this bin width");
  evaluate->add_flag("--svg", svg, "also write SVG plots");

  auto* aggregate = app.add_subcommand("aggregate", "infer labels from crowd annotations via EM");
  aggregate->add_option("--annotations", annotations_path, "annotation CSV")->required();
  aggregate->add_option("--gold", gold_path, "expert labels CSV for agreement");
  aggregate->add_option("--out", out_dir, "output directory")->required();
  aggregate->add_option("--max-iters", max_iters, "EM iteration cap");
  aggregate->add_option("--tol", tol, "EM convergence tolerance");

  auto* search = app.add_subcommand("search", "random search over regularizer coefficients");
  search->add_option("--config", config_path, "run config JSON with a search block")->required();
  search->add_option("--out", out_dir, "output directory (overrides config)");
  search->add_option("--threads", threads, "parallel workers for settings");
  add_seed(search);

  auto* analyze = app.add_subcommand("analyze-potentials",
                                     "dump and summarize decomposed potential scores");
  analyze->add_option("--checkpoint", ckpt_path, "combined-model checkpoint")->required();
  analyze->add_option("--data", data_path, "dataset (jsonl)")->required();
  analyze->add_option("--out", out_dir, "output directory")->required();
  analyze->add_option("--vocab", vocab_path, "vocabulary tsv override");
  analyze->add_option("--embeddings", embeddings_path, "embedding store override");
  analyze->add_flag("--svg", svg, "also write an SVG heatmap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth) return cmd_synth(config_path, out_dir, seed_given ? seed : 42, n_train, n_test);
    if (*featurize) return cmd_featurize(config_path, data_path, out_dir);
    if (*train)
      return cmd_train(config_path, out_dir,
                       seed_given ? std::optional<std::uint64_t>(seed) : std::nullopt);
    if (*predict) return cmd_predict(ckpt_path, data_path, out_path, vocab_path, embeddings_path);
    if (*evaluate)
      return cmd_evaluate(gold_path, pred_path, compare_path, out_dir, chunks, bins, svg);
    if (*aggregate) return cmd_aggregate(annotations_path, gold_path, out_dir, max_iters, tol);
    if (*search)
      return cmd_search(config_path, out_dir,
                        seed_given ? std::optional<std::uint64_t>(seed) : std::nullopt, threads);
    if (*analyze)
      return cmd_analyze_potentials(ckpt_path, data_path, out_dir, vocab_path, embeddings_path,
                                    svg);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const CheckpointMismatchError& e) {
    std::cerr << "checkpoint mismatch: " << e.what() << "\n";
    return 5;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
