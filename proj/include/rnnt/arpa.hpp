// Copyright (c)  2026  rnnt-kit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RNNT_ARPA_HPP_
#define RNNT_ARPA_HPP_

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "rnnt/fsa.hpp"

namespace rnnt {

// One "logp w1 ... wN [bow]" line from an ARPA table.
struct NgramEntry {
  std::vector<std::string> words;
  double logp = 0.0;  // log10
  double bow = 0.0;   // log10
  bool has_bow = false;
};

struct ArpaTable {
  int32_t max_order = 0;     // highest order with a section present
  int32_t declared_max = 0;  // highest order declared in the data section
  std::vector<std::vector<NgramEntry>> grams;  // grams[n-1] = n-gram entries
};

namespace detail {

inline std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Reads the \data\ / \N-grams: / \end\ sections of an ARPA file.
// Orders above 3 are rejected.
inline ArpaTable parse_arpa(const std::string& text) {
  ArpaTable table;
  std::istringstream in(text);
  std::string raw;
  size_t line_no = 0;
  enum class Mode { kPreamble, kData, kGrams, kDone };
  Mode mode = Mode::kPreamble;
  int32_t cur_order = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = detail::trim(raw);
    if (line.empty()) continue;
    if (line == "\\data\\") {
      if (mode != Mode::kPreamble)
        throw ParseError("line " + std::to_string(line_no) +
                         ": unexpected \\data\\");
      mode = Mode::kData;
      continue;
    }
    if (line == "\\end\\") {
      mode = Mode::kDone;
      continue;
    }
    if (line.size() > 1 && line[0] == '\\' && line.back() == ':') {
      // "\N-grams:" section header.
      std::string body = line.substr(1, line.size() - 2);
      size_t dash = body.find("-grams");
      if (dash == std::string::npos || body.substr(dash) != "-grams")
        throw ParseError("line " + std::to_string(line_no) +
                         ": unknown section '" + line + "'");
      int64_t n = detail::parse_int(body.substr(0, dash), line_no);
      if (n < 1)
        throw ParseError("line " + std::to_string(line_no) +
                         ": bad n-gram order");
      if (n > 3)
        throw ValidationError("arpa order " + std::to_string(n) +
                              " unsupported (max 3)");
      cur_order = static_cast<int32_t>(n);
      table.max_order = std::max(table.max_order, cur_order);
      while (static_cast<int32_t>(table.grams.size()) < cur_order)
        table.grams.emplace_back();
      mode = Mode::kGrams;
      continue;
    }
    switch (mode) {
      case Mode::kPreamble:
        break;  // free-form header text before \data\ is ignored
      case Mode::kData: {
        // "ngram N=count"
        std::istringstream ls(line);
        std::string kw, spec;
        ls >> kw >> spec;
        if (kw != "ngram" || spec.empty())
          throw ParseError("line " + std::to_string(line_no) +
                           ": expected 'ngram N=count'");
        size_t eq = spec.find('=');
        if (eq == std::string::npos)
          throw ParseError("line " + std::to_string(line_no) +
                           ": expected 'ngram N=count'");
        int64_t n = detail::parse_int(spec.substr(0, eq), line_no);
        if (n > 3)
          throw ValidationError("arpa order " + std::to_string(n) +
                                " unsupported (max 3)");
        table.declared_max =
            std::max(table.declared_max, static_cast<int32_t>(n));
        break;
      }
      case Mode::kGrams: {
        std::istringstream ls(line);
        std::vector<std::string> toks;
        std::string tok;
        while (ls >> tok) toks.push_back(tok);
        size_t n = static_cast<size_t>(cur_order);
        if (toks.size() != n + 1 && toks.size() != n + 2)
          throw ParseError("line " + std::to_string(line_no) +
                           ": expected logp + " + std::to_string(n) +
                           " words [+ backoff]");
        NgramEntry e;
        e.logp = detail::parse_double(toks[0], line_no);
        e.words.assign(toks.begin() + 1, toks.begin() + 1 + n);
        if (toks.size() == n + 2) {
          if (table.declared_max > 0 && cur_order >= table.declared_max)
            throw ParseError("line " + std::to_string(line_no) +
                             ": backoff weight on highest-order n-gram");
          e.bow = detail::parse_double(toks.back(), line_no);
          e.has_bow = true;
        }
        table.grams[cur_order - 1].push_back(std::move(e));
        break;
      }
      case Mode::kDone:
        throw ParseError("line " + std::to_string(line_no) +
                         ": content after \\end\\");
    }
  }
  if (mode == Mode::kPreamble)
    throw ParseError("arpa text has no \\data\\ section");
  if (table.max_order == 0)
    throw ParseError("arpa text has no n-gram sections");
  return table;
}

// Builds an epsilon-free token-level decoding graph from an ARPA table.
//
// States are n-gram histories. Every listed n-gram probability becomes an
// arc from its history state; backoff weights become epsilon arcs to the
// shortened history. Epsilon removal in the log semiring then folds the
// backoff paths in, so a token's conditional probability is the SUM of its
// explicit probability and all backoff continuations. </s> probabilities
// become final scores; if the table never predicts </s>, every state is
// final with score 0. Entries mentioning <unk> are dropped. All weights
// are converted from log10 to natural log.
inline Fsa ngram_graph_from_arpa(const std::string& arpa_text,
                                 const std::map<std::string, int32_t>& token_map) {
  const ArpaTable table = parse_arpa(arpa_text);
  const int32_t order = table.max_order;
  using History = std::vector<std::string>;

  auto mentions_unk = [](const NgramEntry& e) {
    for (const auto& w : e.words)
      if (w == "<unk>" || w == "<UNK>") return true;
    return false;
  };

  // Histories: the empty history, every gram of order < max order, and the
  // history prefix of every gram.
  std::set<History> history_set;
  history_set.insert(History{});
  for (int32_t n = 1; n <= order; ++n) {
    for (const NgramEntry& e : table.grams[n - 1]) {
      if (mentions_unk(e)) continue;
      if (n < order) history_set.insert(e.words);
      if (n >= 2)
        history_set.insert(History(e.words.begin(), e.words.end() - 1));
    }
  }

  // Start state gets id 0: the <s> history when the table has one.
  History start_key;
  if (history_set.count(History{"<s>"})) start_key = History{"<s>"};
  std::map<History, StateId> state_of;
  state_of[start_key] = 0;
  StateId next_id = 1;
  for (const History& h : history_set)
    if (h != start_key) state_of[h] = next_id++;

  // Longest suffix of `words` (at most order-1 long) that is a history.
  auto next_state = [&](const History& words) -> StateId {
    int32_t max_len =
        std::min<int32_t>(static_cast<int32_t>(words.size()), order - 1);
    for (int32_t len = max_len; len >= 1; --len) {
      History suffix(words.end() - len, words.end());
      auto it = state_of.find(suffix);
      if (it != state_of.end()) return it->second;
    }
    return state_of.at(History{});
  };

  std::vector<Arc> arcs;
  std::map<StateId, double> finals;
  bool saw_sentence_end = false;

  for (int32_t n = 1; n <= order; ++n) {
    for (const NgramEntry& e : table.grams[n - 1]) {
      if (mentions_unk(e)) continue;
      History hist(e.words.begin(), e.words.end() - 1);
      const std::string& word = e.words.back();
      bool hist_has_end = false;
      for (const auto& w : hist)
        if (w == "</s>") hist_has_end = true;

      if (!hist_has_end && state_of.count(hist)) {
        StateId src = state_of.at(hist);
        if (word == "</s>") {
          saw_sentence_end = true;
          double w = e.logp * M_LN10;
          auto it = finals.find(src);
          finals[src] = it == finals.end() ? w : log_add(it->second, w);
        } else if (word != "<s>") {
          auto it = token_map.find(word);
          if (it == token_map.end())
            throw ValidationError("arpa symbol '" + word +
                                  "' not in token map");
          if (it->second <= 0)
            throw ValidationError("arpa symbol '" + word +
                                  "' maps to reserved label " +
                                  std::to_string(it->second));
          History full = hist;
          full.push_back(word);
          arcs.push_back({src, next_state(full),
                          static_cast<Label>(it->second), e.logp * M_LN10});
        }
      }

      // Backoff epsilon arc for this gram's own history state.
      if (e.has_bow && state_of.count(e.words)) {
        History shortened(e.words.begin() + 1, e.words.end());
        StateId dst = shortened.empty() ? state_of.at(History{})
                                        : next_state(shortened);
        arcs.push_back({state_of.at(e.words), dst, 0, e.bow * M_LN10});
      }
    }
  }

  // Histories listed without an explicit backoff weight still back off,
  // with weight 0 (probability 1).
  std::set<StateId> has_backoff;
  for (const Arc& a : arcs)
    if (a.label == 0) has_backoff.insert(a.src);
  for (const auto& [h, s] : state_of) {
    if (h.empty() || has_backoff.count(s)) continue;
    History shortened(h.begin() + 1, h.end());
    StateId dst =
        shortened.empty() ? state_of.at(History{}) : next_state(shortened);
    arcs.push_back({s, dst, 0, 0.0});
  }

  if (!saw_sentence_end)
    for (const auto& [h, s] : state_of) finals[s] = 0.0;

  Fsa raw = make_fsa(next_id, std::move(arcs), std::move(finals));
  Fsa g = remove_epsilons(raw);
  if (!saw_sentence_end) {
    // Unweighted termination: the epsilon closure folded backoff mass into
    // the all-zero finals above; restore "end anywhere at no cost".
    std::map<StateId, double> flat;
    for (StateId s = 0; s < g.num_states; ++s) flat[s] = 0.0;
    g = make_fsa(g.num_states, std::move(g.arcs), std::move(flat));
  }
  return g;
}

}  // namespace rnnt

#endif  // RNNT_ARPA_HPP_
