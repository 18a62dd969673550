#pragma once

// Helpers shared by the test suites: scratch directories, random dataset
// construction, and structural equality checks used by round-trip oracles.

#include <filesystem>
#include <string>
#include <vector>

#include "hybridseq/corpus.hpp"
#include "hybridseq/crowd.hpp"
#include "hybridseq/rng.hpp"

namespace testutil {

namespace fs = std::filesystem;
using namespace hybridseq;

// Scratch directory under the system temp root, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("hybridseq_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

inline bool tokens_equal(const corpus::Token& a, const corpus::Token& b) {
  return a.text == b.text && a.pos_tag == b.pos_tag;
}

inline bool sequences_equal(const corpus::LabeledSequence& a, const corpus::LabeledSequence& b) {
  if (a.doc_id != b.doc_id || a.tokens.size() != b.tokens.size() || a.labels != b.labels)
    return false;
  for (std::size_t i = 0; i < a.tokens.size(); ++i)
    if (!tokens_equal(a.tokens[i], b.tokens[i])) return false;
  return true;
}

inline bool datasets_equal(const corpus::Dataset& a, const corpus::Dataset& b) {
  if (a.scheme.labels != b.scheme.labels || a.scheme.scheme != b.scheme.scheme ||
      a.scheme.other_label != b.scheme.other_label)
    return false;
  if (a.sequences.size() != b.sequences.size()) return false;
  for (std::size_t i = 0; i < a.sequences.size(); ++i)
    if (!sequences_equal(a.sequences[i], b.sequences[i])) return false;
  return true;
}

// Random flat-scheme dataset with conll-compatible doc ids.
inline corpus::Dataset random_flat_dataset(Rng& rng, int n_seqs, int n_labels,
                                           bool with_pos = true) {
  corpus::Dataset d;
  d.scheme.scheme = corpus::Scheme::kFlat;
  d.scheme.other_label = "Other";
  d.scheme.labels.push_back("Other");
  for (int l = 1; l < n_labels; ++l) d.scheme.labels.push_back("L" + std::to_string(l));
  for (int s = 0; s < n_seqs; ++s) {
    corpus::LabeledSequence seq;
    seq.doc_id = "seq" + std::to_string(s);
    const int len = rng.uniform_int(1, 12);
    for (int t = 0; t < len; ++t) {
      corpus::Token tok;
      tok.text = "w" + std::to_string(rng.below(40));
      if (with_pos && rng.bernoulli(0.8)) tok.pos_tag = "P" + std::to_string(rng.below(5));
      seq.tokens.push_back(std::move(tok));
      seq.labels.push_back(rng.uniform_int(0, n_labels - 1));
    }
    d.sequences.push_back(std::move(seq));
  }
  d.validate();
  return d;
}

// Random IOB dataset with well-formed B-/I- runs.
inline corpus::Dataset random_iob_dataset(Rng& rng, int n_seqs, int n_base_labels) {
  corpus::Dataset d;
  d.scheme.scheme = corpus::Scheme::kIob;
  d.scheme.other_label = "O";
  d.scheme.labels.push_back("O");
  for (int l = 0; l < n_base_labels; ++l) {
    d.scheme.labels.push_back("B-X" + std::to_string(l));
    d.scheme.labels.push_back("I-X" + std::to_string(l));
  }
  for (int s = 0; s < n_seqs; ++s) {
    corpus::LabeledSequence seq;
    seq.doc_id = "seq" + std::to_string(s);
    const int len = rng.uniform_int(1, 15);
    int t = 0;
    while (t < len) {
      if (rng.bernoulli(0.6)) {
        seq.tokens.push_back({"w" + std::to_string(rng.below(30)), std::nullopt});
        seq.labels.push_back(0);
        ++t;
      } else {
        const int base = rng.uniform_int(0, n_base_labels - 1);
        const int span_len = std::min(rng.uniform_int(1, 3), len - t);
        for (int k = 0; k < span_len; ++k) {
          seq.tokens.push_back({"w" + std::to_string(rng.below(30)), std::nullopt});
          seq.labels.push_back(1 + 2 * base + (k == 0 ? 0 : 1));
          ++t;
        }
      }
    }
    d.sequences.push_back(std::move(seq));
  }
  d.validate();
  return d;
}

// Planted crowd-annotation experiment: every annotator labels every item,
// responding truthfully with probability `diag` and uniformly over the wrong
// labels otherwise.
struct PlantedAnnotations {
  crowd::AnnotationMatrix matrix;
  std::vector<int> truth;
};

inline PlantedAnnotations plant_annotations(std::uint64_t seed, int n_items, int n_annotators,
                                            int n_labels, double diag) {
  Rng rng(seed);
  PlantedAnnotations p;
  for (int a = 0; a < n_annotators; ++a) p.matrix.annotators.push_back("a" + std::to_string(a));
  for (int i = 0; i < n_items; ++i) {
    p.matrix.items.push_back("i" + std::to_string(i));
    const int truth = rng.uniform_int(0, n_labels - 1);
    p.truth.push_back(truth);
    std::vector<std::pair<int, int>> responses;
    for (int a = 0; a < n_annotators; ++a) {
      int resp = truth;
      if (!rng.bernoulli(diag)) {
        resp = rng.uniform_int(0, n_labels - 2);
        if (resp >= truth) ++resp;
      }
      responses.emplace_back(a, resp);
    }
    p.matrix.responses.push_back(std::move(responses));
  }
  return p;
}

}  // namespace testutil
