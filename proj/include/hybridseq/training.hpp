#pragma once

// End-to-end training of any model variant: Adam with L1/L2 regularization on
// weight matrices, seeded mini-batching, k-fold random search over the
// regularizer coefficients, and the full tune/train/repeat evaluation
// protocol with execution tracing.

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hybridseq/common.hpp"
#include "hybridseq/corpus.hpp"
#include "hybridseq/evaluation.hpp"
#include "hybridseq/featurizer.hpp"
#include "hybridseq/model.hpp"

namespace hybridseq::training {

struct TrainingConfig {
  double eta = 1e-3;
  double c1 = 0.0;  // L1 coefficient
  double c2 = 0.0;  // L2 coefficient
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int batch_size = 16;
  double dropout = 0.5;
  int epochs = 10;
  std::uint64_t seed = 42;

  void validate() const {
    if (eta <= 0) throw ConfigError("training: step size must be > 0");
    if (c1 < 0 || c2 < 0) throw ConfigError("training: regularizer coefficients must be >= 0");
    if (beta1 < 0 || beta1 >= 1 || beta2 < 0 || beta2 >= 1)
      throw ConfigError("training: beta1/beta2 must be in [0, 1)");
    if (batch_size < 1) throw ConfigError("training: batch size must be >= 1");
    if (dropout < 0 || dropout >= 1) throw ConfigError("training: dropout must be in [0, 1)");
    if (epochs < 0) throw ConfigError("training: epochs must be >= 0");
  }
};

struct AdamState {
  std::vector<Vec> m, v;  // aligned with the model's parameter slots
  long t = 0;

  static AdamState zeros_like(const std::vector<model::ParamSlot>& slots) {
    AdamState s;
    for (const auto& slot : slots) {
      s.m.emplace_back(slot.value.size(), 0.0);
      s.v.emplace_back(slot.value.size(), 0.0);
    }
    return s;
  }
};

// theta <- theta - eta * m_hat / (sqrt(v_hat) + eps)
inline void adam_step(std::vector<model::ParamSlot>& slots, AdamState& state,
                      const TrainingConfig& cfg) {
  if (state.m.size() != slots.size()) throw ConfigError("adam_step: state shape mismatch");
  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  for (std::size_t s = 0; s < slots.size(); ++s) {
    auto& slot = slots[s];
    if (slot.value.size() != state.m[s].size()) throw ConfigError("adam_step: slot shape mismatch");
    for (std::size_t i = 0; i < slot.value.size(); ++i) {
      const double g = slot.grad[i];
      if (!std::isfinite(g))
        throw NumericError("non-finite gradient in parameter block '" + slot.name + "'");
      state.m[s][i] = cfg.beta1 * state.m[s][i] + (1.0 - cfg.beta1) * g;
      state.v[s][i] = cfg.beta2 * state.v[s][i] + (1.0 - cfg.beta2) * g * g;
      const double m_hat = state.m[s][i] / bc1;
      const double v_hat = state.v[s][i] / bc2;
      slot.value[i] -= cfg.eta * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

// g' = g + c1 sign(theta) + 2 c2 theta, on weight matrices only (sign(0)=0).
inline void apply_regularization(std::vector<model::ParamSlot>& slots, double c1, double c2) {
  if (c1 == 0.0 && c2 == 0.0) return;
  for (auto& slot : slots) {
    if (!slot.regularize) continue;
    for (std::size_t i = 0; i < slot.value.size(); ++i) {
      const double theta = slot.value[i];
      const double sign = theta > 0 ? 1.0 : (theta < 0 ? -1.0 : 0.0);
      slot.grad[i] += c1 * sign + 2.0 * c2 * theta;
    }
  }
}

// ---------------------------------------------------------------------------
// training loop

struct TrainArtifacts {
  const featurizer::FeaturizerConfig* feat_cfg = nullptr;
  const featurizer::FeatureVocabulary* vocab = nullptr;  // built on train data only
  const embeddings::StaticEmbeddingTable* pretrained = nullptr;
  const embeddings::ContextualEmbeddingStore* store = nullptr;

  model::EncodingContext context() const { return {pretrained, store}; }
};

struct TrainResult {
  model::HybridModel model;
  std::vector<double> epoch_mean_nll;
};

inline TrainResult train(const corpus::Dataset& train_data, const model::VariantSpec& variant,
                         const TrainingConfig& cfg, const TrainArtifacts& art) {
  cfg.validate();
  variant.validate();
  if (train_data.sequences.empty()) throw DataError("train: empty dataset");
  if (variant.use_hb && (!art.feat_cfg || !art.vocab))
    throw ConfigError("train: HB variant requires featurizer artifacts");

  Rng base(cfg.seed);
  TrainResult out;
  model::EncodingContext ctx = art.context();
  out.model = model::init_model(variant, train_data.scheme,
                                art.vocab ? static_cast<int>(art.vocab->size()) : 0, ctx,
                                &train_data, base.child(1).next_u64());

  std::vector<model::SequenceInput> inputs;
  inputs.reserve(train_data.sequences.size());
  for (const auto& seq : train_data.sequences)
    inputs.push_back(model::prepare_input(out.model, seq, art.feat_cfg, art.vocab));

  model::ModelGrads grads = model::ModelGrads::zeros_like(out.model);
  auto slots = model::bind_slots(out.model, grads);
  AdamState adam = AdamState::zeros_like(slots);
  Rng order_rng = base.child(2);
  Rng dropout_rng = base.child(3);

  const std::size_t n = inputs.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    order_rng.shuffle(order);
    double epoch_loss = 0;
    std::size_t pos = 0;
    int batch_index = 0;
    while (pos < n) {
      const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                     n - pos);
      for (auto& slot : slots) std::fill(slot.grad.begin(), slot.grad.end(), 0.0);
      double batch_loss = 0;
      for (std::size_t k = 0; k < take; ++k) {
        const auto& in = inputs[order[pos + k]];
        double loss = model::sequence_loss_and_grad(out.model, ctx, in,
                                                    neural::DropoutMode::kTrain, cfg.dropout,
                                                    &dropout_rng, grads);
        if (!std::isfinite(loss))
          throw NumericError("non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                             std::to_string(batch_index) + " doc '" + in.seq->doc_id + "'");
        batch_loss += loss;
      }
      const double inv = 1.0 / static_cast<double>(take);
      for (auto& slot : slots)
        for (double& g : slot.grad) g *= inv;
      epoch_loss += batch_loss;
      apply_regularization(slots, cfg.c1, cfg.c2);
      try {
        adam_step(slots, adam, cfg);
      } catch (const NumericError& e) {
        throw NumericError(std::string(e.what()) + " at epoch " + std::to_string(epoch) +
                           " batch " + std::to_string(batch_index));
      }
      pos += take;
      ++batch_index;
    }
    out.epoch_mean_nll.push_back(epoch_loss / static_cast<double>(n));
  }
  return out;
}

inline std::vector<std::vector<int>> predict_dataset(const model::HybridModel& m,
                                                     const model::EncodingContext& ctx,
                                                     const corpus::Dataset& data,
                                                     const featurizer::FeaturizerConfig* feat_cfg,
                                                     const featurizer::FeatureVocabulary* vocab) {
  std::vector<std::vector<int>> preds;
  preds.reserve(data.sequences.size());
  for (const auto& seq : data.sequences) {
    auto in = model::prepare_input(m, seq, feat_cfg, vocab);
    preds.push_back(model::predict_sequence(m, ctx, in));
  }
  return preds;
}

// ---------------------------------------------------------------------------
// random search over (c1, c2) with k-fold cross-validation

struct SearchSpace {
  std::vector<double> range_c1;
  std::vector<double> range_c2;
  int n_settings = 10;
};

struct SearchRow {
  double c1 = 0, c2 = 0;
  std::vector<double> fold_f1;
  double mean_f1 = 0;
};

struct SearchResult {
  double best_c1 = 0, best_c2 = 0;
  std::vector<SearchRow> rows;  // in evaluation order
};

// Artifacts for search/protocol runs; the feature vocabulary is rebuilt on
// each training subset, so none is passed here.
struct ProtocolArtifacts {
  const featurizer::FeaturizerConfig* feat_cfg = nullptr;
  const embeddings::StaticEmbeddingTable* pretrained = nullptr;
  const embeddings::ContextualEmbeddingStore* store = nullptr;
};

// Train on the subset with its own freshly built vocabulary, then evaluate
// token macro-F1 on the held-out subset.
inline double train_and_score(const corpus::Dataset& train_subset,
                              const corpus::Dataset& eval_subset,
                              const model::VariantSpec& variant, const TrainingConfig& cfg,
                              const ProtocolArtifacts& art) {
  TrainArtifacts ta;
  ta.feat_cfg = art.feat_cfg;
  ta.pretrained = art.pretrained;
  ta.store = art.store;
  featurizer::FeatureVocabulary vocab;
  if (variant.use_hb) {
    if (!art.feat_cfg) throw ConfigError("HB variant requires a featurizer config");
    vocab = featurizer::build_vocabulary(train_subset, *art.feat_cfg);
    ta.vocab = &vocab;
  }
  TrainResult res = train(train_subset, variant, cfg, ta);
  auto preds = predict_dataset(res.model, ta.context(), eval_subset, ta.feat_cfg, ta.vocab);
  std::vector<std::vector<int>> gold;
  for (const auto& s : eval_subset.sequences) gold.push_back(s.labels);
  return evaluation::token_macro_f1(gold, preds, eval_subset.scheme.labels).macro_f1;
}

// Samples n_settings distinct (c1, c2) pairs uniformly without replacement,
// scores each by k-fold CV macro-F1, and returns the argmax; ties go to the
// smaller (c2, c1) lexicographically. Tuning folds must never contain test
// documents. Settings are independent, so they may be evaluated on worker
// threads; results land by index and the outcome does not depend on timing.
inline SearchResult random_search(const corpus::Dataset& train_data,
                                  const model::VariantSpec& variant,
                                  const TrainingConfig& base_cfg, const SearchSpace& space,
                                  const corpus::SplitPlan& folds, std::uint64_t seed,
                                  const ProtocolArtifacts& art, int* trainings_counter = nullptr,
                                  int threads = 1) {
  if (space.range_c1.empty() || space.range_c2.empty())
    throw ConfigError("random_search: empty search space");
  if (space.n_settings < 1) throw ConfigError("random_search: n_settings must be >= 1");
  if (train_data.split) {
    for (const auto& [doc, fold] : folds.fold_assignments)
      if (train_data.split->test_ids.count(doc))
        throw ConfigError("random_search: test document '" + doc + "' present in tuning folds");
  }

  std::vector<std::pair<double, double>> pairs;
  for (double c1 : space.range_c1)
    for (double c2 : space.range_c2) pairs.emplace_back(c1, c2);
  Rng rng(seed);
  rng.shuffle(pairs);
  const std::size_t take = std::min<std::size_t>(pairs.size(),
                                                 static_cast<std::size_t>(space.n_settings));

  auto evaluate_setting = [&](std::size_t i) {
    SearchRow row;
    row.c1 = pairs[i].first;
    row.c2 = pairs[i].second;
    TrainingConfig cfg = base_cfg;
    cfg.c1 = row.c1;
    cfg.c2 = row.c2;
    for (int f = 0; f < folds.k; ++f) {
      corpus::Dataset tr = train_data.subset(folds.complement_ids(f));
      corpus::Dataset ev = train_data.subset(folds.fold_ids(f));
      tr.split.reset();
      ev.split.reset();
      row.fold_f1.push_back(train_and_score(tr, ev, variant, cfg, art));
    }
    double sum = 0;
    for (double f : row.fold_f1) sum += f;
    row.mean_f1 = sum / static_cast<double>(row.fold_f1.size());
    return row;
  };

  SearchResult result;
  result.rows.resize(take);
  if (threads > 1) {
    std::vector<std::future<SearchRow>> futures(take);
    std::size_t next = 0;
    while (next < take) {
      const std::size_t batch = std::min<std::size_t>(static_cast<std::size_t>(threads), take - next);
      for (std::size_t k = 0; k < batch; ++k)
        futures[next + k] = std::async(std::launch::async, evaluate_setting, next + k);
      for (std::size_t k = 0; k < batch; ++k) result.rows[next + k] = futures[next + k].get();
      next += batch;
    }
  } else {
    for (std::size_t i = 0; i < take; ++i) result.rows[i] = evaluate_setting(i);
  }
  if (trainings_counter) *trainings_counter += static_cast<int>(take) * folds.k;

  bool have_best = false;
  double best_mean = 0;
  for (const auto& row : result.rows) {
    const bool better =
        !have_best || row.mean_f1 > best_mean ||
        (row.mean_f1 == best_mean &&
         std::make_pair(row.c2, row.c1) < std::make_pair(result.best_c2, result.best_c1));
    if (better) {
      have_best = true;
      best_mean = row.mean_f1;
      result.best_c1 = row.c1;
      result.best_c2 = row.c2;
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// the full evaluation protocol: tune by k-fold CV random search, train, and
// repeat to smooth initialization variance; without a predefined split, an
// outer k-fold evaluation reuses the hyperparameters chosen in the first run.

struct ProtocolTrace {
  int tuning_trainings = 0;
  int final_trainings = 0;
  int settings_evaluated = 0;
  int runs = 0;
  int outer_folds = 0;  // 0 in pre-split mode
};

struct ProtocolReport {
  std::vector<double> per_run_f1;
  double mean_f1 = 0;
  double std_f1 = 0;  // sample standard deviation over runs
  // chosen coefficients: one entry in pre-split mode, one per outer fold otherwise
  std::vector<std::pair<double, double>> chosen;
  ProtocolTrace trace;
};

inline ProtocolReport run_protocol(const corpus::Dataset& dataset,
                                   const model::VariantSpec& variant, const TrainingConfig& cfg,
                                   const SearchSpace& space, const ProtocolArtifacts& art,
                                   int repetitions = 3, int cv_folds = 5,
                                   const std::vector<std::uint64_t>* run_seeds = nullptr) {
  if (repetitions < 1) throw ConfigError("run_protocol: repetitions must be >= 1");
  ProtocolReport report;
  report.trace.runs = repetitions;
  Rng base(cfg.seed);

  auto seed_for_run = [&](int run) {
    if (run_seeds) {
      if (run_seeds->size() != static_cast<std::size_t>(repetitions))
        throw ConfigError("run_protocol: run_seeds size mismatch");
      return (*run_seeds)[static_cast<std::size_t>(run)];
    }
    return splitmix64(cfg.seed ^ (0x9e3779b9ull * static_cast<std::uint64_t>(run + 1)));
  };

  if (dataset.split) {
    corpus::Dataset train_part = dataset.subset(dataset.split->train_ids);
    // arm the test-leak guard without referencing docs outside the subset
    train_part.split = corpus::DatasetSplit{{}, dataset.split->test_ids};
    corpus::Dataset test_part = dataset.subset(dataset.split->test_ids);
    corpus::SplitPlan folds =
        corpus::make_folds(dataset.subset(dataset.split->train_ids), cv_folds,
                           base.child(10).next_u64());
    SearchResult search = random_search(train_part, variant, cfg, space, folds,
                                        base.child(11).next_u64(), art,
                                        &report.trace.tuning_trainings);
    report.trace.settings_evaluated = static_cast<int>(search.rows.size());
    report.chosen.emplace_back(search.best_c1, search.best_c2);
    corpus::Dataset train_only = dataset.subset(dataset.split->train_ids);
    for (int run = 0; run < repetitions; ++run) {
      TrainingConfig run_cfg = cfg;
      run_cfg.c1 = search.best_c1;
      run_cfg.c2 = search.best_c2;
      run_cfg.seed = seed_for_run(run);
      report.per_run_f1.push_back(
          train_and_score(train_only, test_part, variant, run_cfg, art));
      ++report.trace.final_trainings;
    }
  } else {
    corpus::SplitPlan outer = corpus::make_folds(dataset, cv_folds, base.child(20).next_u64());
    report.trace.outer_folds = cv_folds;
    std::vector<std::pair<double, double>> fold_hypers(static_cast<std::size_t>(cv_folds));
    for (int run = 0; run < repetitions; ++run) {
      std::vector<std::vector<int>> gold_all, pred_all;
      for (int f = 0; f < cv_folds; ++f) {
        corpus::Dataset tr = dataset.subset(outer.complement_ids(f));
        corpus::Dataset te = dataset.subset(outer.fold_ids(f));
        if (run == 0) {
          corpus::SplitPlan inner =
              corpus::make_folds(tr, cv_folds, base.child(30 + static_cast<std::uint64_t>(f)).next_u64());
          SearchResult search =
              random_search(tr, variant, cfg, space, inner,
                            base.child(40 + static_cast<std::uint64_t>(f)).next_u64(), art,
                            &report.trace.tuning_trainings);
          report.trace.settings_evaluated += static_cast<int>(search.rows.size());
          fold_hypers[static_cast<std::size_t>(f)] = {search.best_c1, search.best_c2};
        }
        TrainingConfig run_cfg = cfg;
        run_cfg.c1 = fold_hypers[static_cast<std::size_t>(f)].first;
        run_cfg.c2 = fold_hypers[static_cast<std::size_t>(f)].second;
        run_cfg.seed = splitmix64(seed_for_run(run) ^ static_cast<std::uint64_t>(f + 1));

        TrainArtifacts ta;
        ta.feat_cfg = art.feat_cfg;
        ta.pretrained = art.pretrained;
        ta.store = art.store;
        featurizer::FeatureVocabulary vocab;
        if (variant.use_hb) {
          vocab = featurizer::build_vocabulary(tr, *art.feat_cfg);
          ta.vocab = &vocab;
        }
        TrainResult res = train(tr, variant, run_cfg, ta);
        ++report.trace.final_trainings;
        auto preds = predict_dataset(res.model, ta.context(), te, ta.feat_cfg, ta.vocab);
        for (std::size_t s = 0; s < te.sequences.size(); ++s) {
          gold_all.push_back(te.sequences[s].labels);
          pred_all.push_back(preds[s]);
        }
      }
      report.per_run_f1.push_back(
          evaluation::token_macro_f1(gold_all, pred_all, dataset.scheme.labels).macro_f1);
    }
    report.chosen = fold_hypers;
  }

  double sum = 0;
  for (double f : report.per_run_f1) sum += f;
  report.mean_f1 = sum / static_cast<double>(report.per_run_f1.size());
  bool all_equal = true;
  for (double f : report.per_run_f1) all_equal = all_equal && f == report.per_run_f1[0];
  double ss = 0;
  for (double f : report.per_run_f1) ss += (f - report.mean_f1) * (f - report.mean_f1);
  report.std_f1 = !all_equal && report.per_run_f1.size() > 1
                      ? std::sqrt(ss / static_cast<double>(report.per_run_f1.size() - 1))
                      : 0.0;
  return report;
}

}  // namespace hybridseq::training
