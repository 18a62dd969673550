#pragma once

// Ontology-derived phrase lists and cue-word lists, with span-match and
// context-window queries over token sequences. Matching is exact token-level
// comparison after case folding; fuzzy matching is deliberately out of scope.

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "hybridseq/common.hpp"

namespace hybridseq::lexicon {

struct Lexicon {
  std::string name;
  // case-folded phrases, each an ordered token list
  std::vector<std::vector<std::string>> entries;
};

struct CueLexicon {
  std::string name;
  std::set<std::string> cues;  // case-folded single tokens
  int window = 4;
};

inline std::string name_from_path(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// One phrase per line; '#' comments and blank lines skipped.
inline Lexicon load_lexicon(const std::string& path, std::string name = "") {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lexicon: " + path);
  Lexicon lex;
  lex.name = name.empty() ? name_from_path(path) : std::move(name);
  std::set<std::vector<std::string>> seen;
  std::string line;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto toks = split_ws(case_fold(t));
    if (toks.empty()) continue;
    if (seen.insert(toks).second) lex.entries.push_back(std::move(toks));
  }
  if (lex.entries.empty()) throw DataError("lexicon has no usable entries: " + path);
  return lex;
}

// Same format, with a leading "window=N" line; entries must be single tokens.
inline CueLexicon load_cue_lexicon(const std::string& path, std::string name = "") {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open cue lexicon: " + path);
  CueLexicon lex;
  lex.name = name.empty() ? name_from_path(path) : std::move(name);
  std::string line;
  bool have_window = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (!have_window) {
      if (t.rfind("window=", 0) != 0)
        throw DataError(path + ": cue lexicon must start with 'window=N'");
      lex.window = std::stoi(t.substr(7));
      if (lex.window < 1) throw DataError(path + ": window must be >= 1");
      have_window = true;
      continue;
    }
    std::string cue = case_fold(t);
    if (has_whitespace(cue)) throw DataError(path + ": cue entries must be single tokens: " + t);
    lex.cues.insert(cue);
  }
  if (!have_window) throw DataError(path + ": cue lexicon must start with 'window=N'");
  if (lex.cues.empty()) throw DataError("cue lexicon has no usable entries: " + path);
  return lex;
}

struct Span {
  std::size_t start;
  std::size_t end;  // exclusive
};

// All maximal case-insensitive matches; the longest entry wins at each start,
// and overlapping matches from different starts are all reported.
inline std::vector<Span> match_spans(std::span<const std::string> tokens, const Lexicon& lex) {
  std::vector<std::string> folded;
  folded.reserve(tokens.size());
  for (const auto& t : tokens) folded.push_back(case_fold(t));

  // entries grouped by first token, longest first
  std::map<std::string, std::vector<const std::vector<std::string>*>> by_first;
  for (const auto& e : lex.entries) by_first[e.front()].push_back(&e);
  for (auto& [k, v] : by_first)
    std::sort(v.begin(), v.end(),
              [](const auto* a, const auto* b) { return a->size() > b->size(); });

  std::vector<Span> out;
  for (std::size_t i = 0; i < folded.size(); ++i) {
    auto it = by_first.find(folded[i]);
    if (it == by_first.end()) continue;
    for (const auto* entry : it->second) {
      if (i + entry->size() > folded.size()) continue;
      bool ok = true;
      for (std::size_t k = 1; k < entry->size() && ok; ++k)
        ok = (*entry)[k] == folded[i + k];
      if (ok) {
        out.push_back({i, i + entry->size()});
        break;  // longest match at this start
      }
    }
  }
  return out;
}

struct ContextFlags {
  bool in_left_context = false;   // a cue occurs within `window` tokens to the left
  bool in_right_context = false;  // symmetric
};

inline std::vector<ContextFlags> cue_context_flags(std::span<const std::string> tokens,
                                                   const CueLexicon& cue) {
  const std::size_t n = tokens.size();
  std::vector<bool> is_cue(n, false);
  for (std::size_t i = 0; i < n; ++i) is_cue[i] = cue.cues.count(case_fold(tokens[i])) > 0;

  std::vector<ContextFlags> out(n);
  const std::size_t w = static_cast<std::size_t>(cue.window);
  for (std::size_t i = 0; i < n; ++i) {
    if (!is_cue[i]) continue;
    // token i is a cue: flag neighbors, never the cue position itself
    for (std::size_t j = i + 1; j < n && j <= i + w; ++j) out[j].in_left_context = true;
    for (std::size_t j = (i >= w ? i - w : 0); j < i; ++j) out[j].in_right_context = true;
  }
  return out;
}

}  // namespace hybridseq::lexicon
