#include <doctest.h>

#include "hybridseq/lexicon.hpp"
#include "hybridseq/rng.hpp"
#include "test_util.hpp"

using namespace hybridseq;
using namespace testutil;

TEST_SUITE_BEGIN("lexicon");

TEST_CASE("load_lexicon case-folds and tokenizes phrases") {
  TempDir dir("lex_load");
  write_file(dir.file("dis.txt"), "rheumatoid arthritis\nAsthma\n");
  auto lex = lexicon::load_lexicon(dir.file("dis.txt"));
  REQUIRE(lex.entries.size() == 2);
  CHECK(lex.entries[0] == std::vector<std::string>{"rheumatoid", "arthritis"});
  CHECK(lex.entries[1] == std::vector<std::string>{"asthma"});
  CHECK(lex.name == "dis");
}

TEST_CASE("load_lexicon deduplicates after case folding") {
  TempDir dir("lex_dup");
  write_file(dir.file("l.txt"), "asthma\nAsthma\n# comment\n\n");
  auto lex = lexicon::load_lexicon(dir.file("l.txt"));
  CHECK(lex.entries.size() == 1);
}

TEST_CASE("load_lexicon keeps every distinct phrase") {
  Rng rng(11);
  TempDir dir("lex_count");
  std::set<std::string> phrases;
  while (phrases.size() < 60)
    phrases.insert("p" + std::to_string(rng.below(100000)) + " q" + std::to_string(rng.below(9)));
  std::string content;
  for (const auto& p : phrases) content += p + "\n";
  write_file(dir.file("l.txt"), content);
  auto lex = lexicon::load_lexicon(dir.file("l.txt"));
  CHECK(lex.entries.size() == phrases.size());
}

TEST_CASE("load_lexicon rejects empty files") {
  TempDir dir("lex_empty");
  write_file(dir.file("l.txt"), "# nothing here\n\n");
  CHECK_THROWS_AS(lexicon::load_lexicon(dir.file("l.txt")), DataError);
  CHECK_THROWS_AS(lexicon::load_lexicon(dir.file("missing.txt")), DataError);
}

TEST_CASE("match_spans finds multiword entries case-insensitively") {
  lexicon::Lexicon lex{"dis", {{"rheumatoid", "arthritis"}}};
  std::vector<std::string> tokens{"active", "Rheumatoid", "Arthritis"};
  auto spans = lexicon::match_spans(tokens, lex);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].start == 1);
  CHECK(spans[0].end == 3);
}

TEST_CASE("match_spans with an empty lexicon finds nothing") {
  lexicon::Lexicon lex{"empty", {}};
  std::vector<std::string> tokens{"a", "b"};
  CHECK(lexicon::match_spans(tokens, lex).empty());
}

// Brute-force oracle: test every (start, length) substring; keep the longest
// match at each start.
static std::vector<lexicon::Span> match_spans_oracle(const std::vector<std::string>& tokens,
                                                     const lexicon::Lexicon& lex) {
  std::vector<std::string> folded;
  for (const auto& t : tokens) folded.push_back(case_fold(t));
  std::vector<lexicon::Span> out;
  for (std::size_t start = 0; start < folded.size(); ++start) {
    std::size_t best_len = 0;
    for (std::size_t len = 1; start + len <= folded.size(); ++len) {
      std::vector<std::string> cand(folded.begin() + static_cast<long>(start),
                                    folded.begin() + static_cast<long>(start + len));
      for (const auto& e : lex.entries)
        if (e == cand) best_len = std::max(best_len, len);
    }
    if (best_len > 0) out.push_back({start, start + best_len});
  }
  return out;
}

TEST_CASE("match_spans equals the exhaustive substring oracle") {
  Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    lexicon::Lexicon lex;
    lex.name = "r";
    const int n_entries = rng.uniform_int(1, 8);
    std::set<std::vector<std::string>> uniq;
    for (int e = 0; e < n_entries; ++e) {
      std::vector<std::string> phrase;
      const int len = rng.uniform_int(1, 3);
      for (int k = 0; k < len; ++k) phrase.push_back("t" + std::to_string(rng.below(6)));
      uniq.insert(phrase);
    }
    lex.entries.assign(uniq.begin(), uniq.end());
    std::vector<std::string> tokens;
    const int T = rng.uniform_int(1, 12);
    for (int t = 0; t < T; ++t) tokens.push_back("t" + std::to_string(rng.below(6)));

    auto got = lexicon::match_spans(tokens, lex);
    auto want = match_spans_oracle(tokens, lex);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i].start == want[i].start);
      CHECK(got[i].end == want[i].end);
      CHECK(got[i].start < got[i].end);
      CHECK(got[i].end <= tokens.size());
    }
  }
}

TEST_CASE("match_spans is invariant under input casing") {
  lexicon::Lexicon lex{"l", {{"foo", "bar"}, {"baz"}}};
  std::vector<std::string> lower{"foo", "bar", "baz"};
  std::vector<std::string> upper{"FOO", "Bar", "BAZ"};
  auto a = lexicon::match_spans(lower, lex);
  auto b = lexicon::match_spans(upper, lex);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].start == b[i].start);
    CHECK(a[i].end == b[i].end);
  }
}

TEST_CASE("cue flags mark neighbors but never the cue itself") {
  lexicon::CueLexicon cue{"neg", {"not"}, 4};
  std::vector<std::string> tokens{"not", "improving"};
  auto flags = lexicon::cue_context_flags(tokens, cue);
  CHECK(flags[1].in_left_context);
  CHECK(!flags[1].in_right_context);
  CHECK(!flags[0].in_left_context);
  CHECK(!flags[0].in_right_context);
}

TEST_CASE("cue flags are all zero without cues") {
  lexicon::CueLexicon cue{"neg", {"not"}, 4};
  std::vector<std::string> tokens{"antiseptic", "handwash", "to", "decrease", "bacteria"};
  for (const auto& f : lexicon::cue_context_flags(tokens, cue)) {
    CHECK(!f.in_left_context);
    CHECK(!f.in_right_context);
  }
}

TEST_CASE("cue flags equal a brute-force window scan") {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    lexicon::CueLexicon cue;
    cue.name = "c";
    cue.window = rng.uniform_int(1, 5);
    const int n_cues = rng.uniform_int(1, 3);
    for (int c = 0; c < n_cues; ++c) cue.cues.insert("t" + std::to_string(rng.below(5)));
    std::vector<std::string> tokens;
    const int T = rng.uniform_int(1, 14);
    for (int t = 0; t < T; ++t) tokens.push_back("t" + std::to_string(rng.below(5)));

    auto flags = lexicon::cue_context_flags(tokens, cue);
    for (int i = 0; i < T; ++i) {
      bool left = false, right = false;
      for (int j = 0; j < T; ++j) {
        if (j == i || !cue.cues.count(tokens[static_cast<std::size_t>(j)])) continue;
        if (j < i && i - j <= cue.window) left = true;
        if (j > i && j - i <= cue.window) right = true;
      }
      CHECK(flags[static_cast<std::size_t>(i)].in_left_context == left);
      CHECK(flags[static_cast<std::size_t>(i)].in_right_context == right);
    }
  }
}

TEST_CASE("a window covering the sequence means anywhere-left/right") {
  Rng rng(41);
  for (int trial = 0; trial < 30; ++trial) {
    const int T = rng.uniform_int(1, 10);
    lexicon::CueLexicon cue;
    cue.name = "c";
    cue.window = T + 1;
    cue.cues.insert("cue");
    std::vector<std::string> tokens;
    for (int t = 0; t < T; ++t)
      tokens.push_back(rng.bernoulli(0.3) ? "cue" : "w" + std::to_string(rng.below(4)));
    auto flags = lexicon::cue_context_flags(tokens, cue);
    for (int i = 0; i < T; ++i) {
      bool any_left = false, any_right = false;
      for (int j = 0; j < i; ++j) any_left = any_left || tokens[static_cast<std::size_t>(j)] == "cue";
      for (int j = i + 1; j < T; ++j)
        any_right = any_right || tokens[static_cast<std::size_t>(j)] == "cue";
      CHECK(flags[static_cast<std::size_t>(i)].in_left_context == any_left);
      CHECK(flags[static_cast<std::size_t>(i)].in_right_context == any_right);
    }
  }
}

TEST_CASE("cue lexicon files carry the window on line one") {
  TempDir dir("cue_file");
  write_file(dir.file("neg.txt"), "window=3\nnot\nnone\nNo\n");
  auto cue = lexicon::load_cue_lexicon(dir.file("neg.txt"));
  CHECK(cue.window == 3);
  CHECK(cue.cues == std::set<std::string>{"not", "none", "no"});
  write_file(dir.file("bad.txt"), "not\n");
  CHECK_THROWS_AS(lexicon::load_cue_lexicon(dir.file("bad.txt")), DataError);
}

TEST_SUITE_END();
