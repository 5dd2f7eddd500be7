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

#ifndef RNNT_FSA_HPP_
#define RNNT_FSA_HPP_

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <deque>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rnnt/common.hpp"

namespace rnnt {

using StateId = int32_t;
// Label 0 is reserved for blank in lattices and forbidden in decoding
// graphs; a label-0 arc during graph construction is an epsilon.
using Label = int32_t;

struct Arc {
  StateId src = 0;
  StateId dst = 0;
  Label label = 0;
  double score = 0.0;  // natural-log probability

  bool operator==(const Arc& o) const {
    return src == o.src && dst == o.dst && label == o.label &&
           score == o.score;
  }
};

// Weighted finite-state acceptor. Start state is always 0; arcs are grouped
// contiguously by src with arc_splits indexing the groups. Doubles as
// decoding graph (no label-0 arcs) and output lattice (label 0 = blank).
struct Fsa {
  StateId num_states = 0;
  std::vector<Arc> arcs;
  std::vector<int32_t> arc_splits;     // size num_states + 1
  std::map<StateId, double> finals;    // state -> final score

  int32_t num_arcs_of(StateId s) const {
    return arc_splits[s + 1] - arc_splits[s];
  }
  const Arc* arcs_begin(StateId s) const { return arcs.data() + arc_splits[s]; }
  const Arc* arcs_end(StateId s) const {
    return arcs.data() + arc_splits[s + 1];
  }
  bool is_final(StateId s) const { return finals.count(s) != 0; }
  double final_score(StateId s) const {
    auto it = finals.find(s);
    return it == finals.end() ? kNegInf : it->second;
  }
  bool has_epsilon_arcs() const {
    for (const Arc& a : arcs)
      if (a.label == 0) return true;
    return false;
  }
  bool operator==(const Fsa& o) const {
    return num_states == o.num_states && arcs == o.arcs && finals == o.finals;
  }
};

// Builds a valid Fsa from loose parts: validates ids and scores,
// stable-sorts arcs by src, and computes arc_splits.
inline Fsa make_fsa(StateId num_states, std::vector<Arc> arcs,
                    std::map<StateId, double> finals) {
  if (num_states <= 0)
    throw ValidationError("fsa must have at least one state");
  for (const Arc& a : arcs) {
    if (a.src < 0 || a.src >= num_states || a.dst < 0 || a.dst >= num_states)
      throw ValidationError("arc references state out of range");
    if (a.label < 0) throw ValidationError("arc label must be >= 0");
    if (!std::isfinite(a.score))
      throw ValidationError("arc score must be finite");
  }
  for (const auto& [s, w] : finals) {
    if (s < 0 || s >= num_states)
      throw ValidationError("final state out of range");
    if (!std::isfinite(w)) throw ValidationError("final score must be finite");
  }
  std::stable_sort(arcs.begin(), arcs.end(),
                   [](const Arc& a, const Arc& b) { return a.src < b.src; });
  Fsa fsa;
  fsa.num_states = num_states;
  fsa.arcs = std::move(arcs);
  fsa.finals = std::move(finals);
  fsa.arc_splits.assign(num_states + 1, 0);
  for (const Arc& a : fsa.arcs) fsa.arc_splits[a.src + 1]++;
  for (StateId s = 0; s < num_states; ++s)
    fsa.arc_splits[s + 1] += fsa.arc_splits[s];
  return fsa;
}

// A complete path through an acyclic Fsa: consecutive arcs connect, the
// first src is the start state, the last dst is a final state.
struct Path {
  std::vector<int32_t> arc_indices;  // indices into the owning Fsa's arcs
  std::vector<Label> labels;         // with blanks
  double score = 0.0;                // arc scores + final score

  bool operator==(const Path& o) const {
    return arc_indices == o.arc_indices;
  }
};

namespace detail {

inline std::string format_score(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& tok, size_t line_no) {
  try {
    size_t pos = 0;
    double v = std::stod(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) +
                     ": bad number '" + tok + "'");
  }
}

inline int64_t parse_int(const std::string& tok, size_t line_no) {
  try {
    size_t pos = 0;
    long long v = std::stoll(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) +
                     ": bad integer '" + tok + "'");
  }
}

}  // namespace detail

// Text format, one record per line:
//   "src dst label score"   arc
//   "state final_score"     final state
// Lines starting with '#' are comments. States are renumbered densely
// (order-preserving) only if the mentioned ids have gaps.
inline Fsa parse_fsa_text(const std::string& text) {
  std::vector<Arc> arcs;
  std::map<StateId, double> finals;
  std::set<int64_t> mentioned;

  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::vector<std::string> toks;
    std::string tok;
    while (ls >> tok) toks.push_back(tok);
    if (toks.empty() || toks[0][0] == '#') continue;
    if (toks.size() == 4) {
      Arc a;
      int64_t src = detail::parse_int(toks[0], line_no);
      int64_t dst = detail::parse_int(toks[1], line_no);
      int64_t label = detail::parse_int(toks[2], line_no);
      double score = detail::parse_double(toks[3], line_no);
      if (src < 0 || dst < 0)
        throw ParseError("line " + std::to_string(line_no) +
                         ": negative state id");
      if (label < 0)
        throw ParseError("line " + std::to_string(line_no) +
                         ": negative label");
      if (!std::isfinite(score))
        throw ParseError("line " + std::to_string(line_no) +
                         ": non-finite arc score");
      a.src = static_cast<StateId>(src);
      a.dst = static_cast<StateId>(dst);
      a.label = static_cast<Label>(label);
      a.score = score;
      arcs.push_back(a);
      mentioned.insert(src);
      mentioned.insert(dst);
    } else if (toks.size() == 2) {
      int64_t s = detail::parse_int(toks[0], line_no);
      double w = detail::parse_double(toks[1], line_no);
      if (s < 0)
        throw ParseError("line " + std::to_string(line_no) +
                         ": negative state id");
      if (!std::isfinite(w))
        throw ParseError("line " + std::to_string(line_no) +
                         ": non-finite final score");
      finals[static_cast<StateId>(s)] = w;
      mentioned.insert(s);
    } else {
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected 'src dst label score' or "
                       "'state final_score'");
    }
  }
  if (finals.empty())
    throw ValidationError("fsa text has no final state");

  // Dense renumber, order-preserving, only if ids have gaps.
  int64_t max_id = *mentioned.rbegin();
  bool dense = max_id == static_cast<int64_t>(mentioned.size()) - 1 &&
               *mentioned.begin() == 0;
  if (!dense) {
    std::map<int64_t, StateId> remap;
    StateId next = 0;
    for (int64_t id : mentioned) remap[id] = next++;
    for (Arc& a : arcs) {
      a.src = remap[a.src];
      a.dst = remap[a.dst];
    }
    std::map<StateId, double> new_finals;
    for (const auto& [s, w] : finals) new_finals[remap[s]] = w;
    finals = std::move(new_finals);
    max_id = next - 1;
  }
  return make_fsa(static_cast<StateId>(max_id + 1), std::move(arcs),
                  std::move(finals));
}

// Inverse of parse_fsa_text; output re-parses to an identical Fsa.
inline std::string serialize_fsa_text(const Fsa& fsa) {
  std::string out;
  for (const Arc& a : fsa.arcs) {
    out += std::to_string(a.src);
    out += ' ';
    out += std::to_string(a.dst);
    out += ' ';
    out += std::to_string(a.label);
    out += ' ';
    out += detail::format_score(a.score);
    out += '\n';
  }
  for (const auto& [s, w] : fsa.finals) {
    out += std::to_string(s);
    out += ' ';
    out += detail::format_score(w);
    out += '\n';
  }
  return out;
}

// One-state decoding graph accepting any token sequence: self-loops for
// labels 1..vocab_size-1 with score 0, start = final with final score 0.
inline Fsa trivial_graph(int32_t vocab_size) {
  if (vocab_size < 1)
    throw ValidationError("trivial_graph: vocab_size must be >= 1");
  std::vector<Arc> arcs;
  arcs.reserve(vocab_size - 1);
  for (Label c = 1; c < vocab_size; ++c) arcs.push_back({0, 0, c, 0.0});
  return make_fsa(1, std::move(arcs), {{0, 0.0}});
}

// Topological order of states reachable from the start state.
// Throws if a reachable cycle exists.
inline std::vector<StateId> topo_order(const Fsa& fsa) {
  enum : uint8_t { kWhite, kGray, kBlack };
  std::vector<uint8_t> color(fsa.num_states, kWhite);
  std::vector<StateId> order;
  order.reserve(fsa.num_states);
  // Iterative DFS; post-order reversed is a topological order.
  std::vector<std::pair<StateId, int32_t>> stack;
  stack.emplace_back(0, 0);
  color[0] = kGray;
  while (!stack.empty()) {
    auto& [s, next_arc] = stack.back();
    if (next_arc < fsa.num_arcs_of(s)) {
      StateId d = fsa.arcs_begin(s)[next_arc].dst;
      ++next_arc;
      if (color[d] == kGray)
        throw ValidationError("fsa has a cycle; operation requires acyclic");
      if (color[d] == kWhite) {
        color[d] = kGray;
        stack.emplace_back(d, 0);
      }
    } else {
      color[s] = kBlack;
      order.push_back(s);
      stack.pop_back();
    }
  }
  std::reverse(order.begin(), order.end());
  return order;
}

namespace detail {

// Suffix scores in the tropical semiring: best[s] = max over complete
// continuations from s (arc scores + final score), -inf if none.
inline std::vector<double> best_suffix_scores(
    const Fsa& fsa, const std::vector<StateId>& topo) {
  std::vector<double> best(fsa.num_states, kNegInf);
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    StateId s = *it;
    double b = fsa.final_score(s);
    for (const Arc* a = fsa.arcs_begin(s); a != fsa.arcs_end(s); ++a)
      b = std::max(b, a->score + best[a->dst]);
    best[s] = b;
  }
  return best;
}

// Suffix scores in the log semiring: total log-prob of all complete
// continuations from s.
inline std::vector<double> total_suffix_scores(
    const Fsa& fsa, const std::vector<StateId>& topo) {
  std::vector<double> tot(fsa.num_states, kNegInf);
  for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
    StateId s = *it;
    double t = fsa.final_score(s);
    for (const Arc* a = fsa.arcs_begin(s); a != fsa.arcs_end(s); ++a)
      t = log_add(t, a->score + tot[a->dst]);
    tot[s] = t;
  }
  return tot;
}

}  // namespace detail

// Maximum-score complete path (tropical semiring). Ties are broken toward
// the lexicographically smallest (src, arc-index) sequence, which the
// trace below yields by preferring stopping and then the smallest arc
// index among optimal continuations.
inline Path best_path(const Fsa& fsa) {
  auto topo = topo_order(fsa);
  auto best = detail::best_suffix_scores(fsa, topo);
  if (best[0] == kNegInf)
    throw ValidationError("empty lattice: no path from start to a final state");
  Path path;
  StateId s = 0;
  double remaining = best[0];
  while (true) {
    if (fsa.final_score(s) == remaining && fsa.is_final(s)) {
      path.score += fsa.final_score(s);
      break;
    }
    int32_t chosen = -1;
    for (int32_t i = 0; i < fsa.num_arcs_of(s); ++i) {
      const Arc& a = fsa.arcs_begin(s)[i];
      if (a.score + best[a.dst] == remaining) {
        chosen = i;
        break;
      }
    }
    if (chosen < 0)
      throw ValidationError("best_path trace failed (inconsistent scores)");
    const Arc& a = fsa.arcs_begin(s)[chosen];
    path.arc_indices.push_back(fsa.arc_splits[s] + chosen);
    path.labels.push_back(a.label);
    path.score += a.score;
    remaining = best[a.dst];
    s = a.dst;
  }
  return path;
}

// log-sum-exp over all complete paths of (arc-score sum + final score).
// Returns -inf for an empty (pathless) lattice.
inline double total_logprob(const Fsa& fsa) {
  auto topo = topo_order(fsa);
  auto tot = detail::total_suffix_scores(fsa, topo);
  return tot[0];
}

// Samples n complete paths (with repetition) with probability proportional
// to exp(path score), by walking from the start state and choosing each
// continuation with probability exp(option score + suffix log-add) /
// normalizer. Deterministic given the seed. Empty lattice -> empty list.
inline std::vector<Path> sample_nbest(const Fsa& fsa, int32_t n,
                                      uint64_t seed) {
  auto topo = topo_order(fsa);
  auto tot = detail::total_suffix_scores(fsa, topo);
  if (tot[0] == kNegInf) return {};
  DetRng rng(seed);
  std::vector<Path> paths;
  paths.reserve(n);
  for (int32_t k = 0; k < n; ++k) {
    Path p;
    StateId s = 0;
    while (true) {
      double u = rng.uniform01();
      double acc = 0.0;
      bool stopped = false;
      int32_t chosen = -1;
      double stop_p = fsa.is_final(s)
                          ? std::exp(fsa.final_score(s) - tot[s])
                          : 0.0;
      acc += stop_p;
      if (u < acc) {
        stopped = true;
      } else {
        int32_t na = fsa.num_arcs_of(s);
        for (int32_t i = 0; i < na; ++i) {
          const Arc& a = fsa.arcs_begin(s)[i];
          acc += std::exp(a.score + tot[a.dst] - tot[s]);
          if (u < acc) {
            chosen = i;
            break;
          }
        }
        if (chosen < 0) {
          // Rounding left us past the last cumulative bucket; take the
          // last option with nonzero probability.
          for (int32_t i = na - 1; i >= 0; --i) {
            const Arc& a = fsa.arcs_begin(s)[i];
            if (a.score + tot[a.dst] != kNegInf) {
              chosen = i;
              break;
            }
          }
          if (chosen < 0) stopped = true;
        }
      }
      if (stopped) {
        p.score += fsa.final_score(s);
        break;
      }
      const Arc& a = fsa.arcs_begin(s)[chosen];
      p.arc_indices.push_back(fsa.arc_splits[s] + chosen);
      p.labels.push_back(a.label);
      p.score += a.score;
      s = a.dst;
    }
    paths.push_back(std::move(p));
  }
  return paths;
}

// Strips blanks (label 0) from each path's label sequence and deduplicates,
// keeping first-appearance order.
inline std::vector<std::vector<Label>> remove_blanks_unique(
    const std::vector<Path>& paths) {
  std::vector<std::vector<Label>> out;
  std::set<std::vector<Label>> seen;
  for (const Path& p : paths) {
    std::vector<Label> seq;
    for (Label l : p.labels)
      if (l != 0) seq.push_back(l);
    if (seen.insert(seq).second) out.push_back(std::move(seq));
  }
  return out;
}

// Linear acceptor of seq; with_blank_loops adds a label-0 self-loop of
// score 0 at every state so it composes with lattices containing blanks.
inline Fsa linear_acceptor(const std::vector<Label>& seq,
                           bool with_blank_loops = false) {
  StateId n = static_cast<StateId>(seq.size());
  std::vector<Arc> arcs;
  for (StateId i = 0; i < n; ++i)
    arcs.push_back({i, i + 1, seq[i], 0.0});
  if (with_blank_loops)
    for (StateId i = 0; i <= n; ++i) arcs.push_back({i, i, 0, 0.0});
  return make_fsa(n + 1, std::move(arcs), {{n, 0.0}});
}

// Product (intersection) of two acceptors over matching labels. Label 0 is
// treated as an ordinary symbol (both inputs must use it consistently).
// Scores add; finals add. States are discovered breadth-first from (0,0).
inline Fsa intersect(const Fsa& a, const Fsa& b) {
  std::unordered_map<int64_t, StateId> index;
  std::vector<std::pair<StateId, StateId>> pairs;
  auto key = [&](StateId sa, StateId sb) {
    return static_cast<int64_t>(sa) * b.num_states + sb;
  };
  auto intern = [&](StateId sa, StateId sb) {
    auto [it, fresh] = index.try_emplace(key(sa, sb),
                                         static_cast<StateId>(pairs.size()));
    if (fresh) pairs.emplace_back(sa, sb);
    return it->second;
  };
  intern(0, 0);
  std::vector<Arc> arcs;
  std::map<StateId, double> finals;
  for (size_t i = 0; i < pairs.size(); ++i) {
    auto [sa, sb] = pairs[i];
    StateId src = static_cast<StateId>(i);
    for (const Arc* pa = a.arcs_begin(sa); pa != a.arcs_end(sa); ++pa)
      for (const Arc* pb = b.arcs_begin(sb); pb != b.arcs_end(sb); ++pb)
        if (pa->label == pb->label)
          arcs.push_back({src, intern(pa->dst, pb->dst), pa->label,
                          pa->score + pb->score});
    if (a.is_final(sa) && b.is_final(sb))
      finals[src] = a.final_score(sa) + b.final_score(sb);
  }
  // An empty finals map is allowed: such an FSA accepts nothing and
  // total_logprob reports -inf.
  return make_fsa(static_cast<StateId>(pairs.size()), std::move(arcs),
                  std::move(finals));
}

// Nondeterministic acceptance check: does the graph accept the (blank-free)
// label sequence? Works on cyclic graphs.
inline bool fsa_accepts(const Fsa& graph, const std::vector<Label>& seq) {
  std::set<StateId> cur{0};
  for (Label tok : seq) {
    std::set<StateId> next;
    for (StateId s : cur)
      for (const Arc* a = graph.arcs_begin(s); a != graph.arcs_end(s); ++a)
        if (a->label == tok) next.insert(a->dst);
    if (next.empty()) return false;
    cur = std::move(next);
  }
  for (StateId s : cur)
    if (graph.is_final(s)) return true;
  return false;
}

// log-sum-exp over all lattice paths whose blank-removed labels equal seq.
// Implemented as intersection with the blank-self-loop linear acceptor of
// seq. Returns -inf if seq is unreachable.
inline double sequence_total_logprob(const Fsa& lattice,
                                     const std::vector<Label>& seq) {
  for (Label l : seq)
    if (l == 0)
      throw ValidationError("sequence_total_logprob: seq must be blank-free");
  Fsa product = intersect(lattice, linear_acceptor(seq, true));
  return total_logprob(product);
}

// Trims states not reachable from the start or not reaching a final state,
// renumbering the survivors order-preservingly (start remains 0).
// Throws if the start state itself is trimmed (empty FSA).
inline Fsa connect(const Fsa& fsa) {
  std::vector<bool> fwd(fsa.num_states, false);
  std::deque<StateId> queue{0};
  fwd[0] = true;
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (const Arc* a = fsa.arcs_begin(s); a != fsa.arcs_end(s); ++a)
      if (!fwd[a->dst]) {
        fwd[a->dst] = true;
        queue.push_back(a->dst);
      }
  }
  // Backward reachability over reversed arcs.
  std::vector<std::vector<StateId>> preds(fsa.num_states);
  for (const Arc& a : fsa.arcs) preds[a.dst].push_back(a.src);
  std::vector<bool> bwd(fsa.num_states, false);
  for (const auto& [s, w] : fsa.finals)
    if (!bwd[s]) {
      bwd[s] = true;
      queue.push_back(s);
    }
  while (!queue.empty()) {
    StateId s = queue.front();
    queue.pop_front();
    for (StateId p : preds[s])
      if (!bwd[p]) {
        bwd[p] = true;
        queue.push_back(p);
      }
  }
  std::vector<StateId> remap(fsa.num_states, -1);
  StateId next = 0;
  for (StateId s = 0; s < fsa.num_states; ++s)
    if (fwd[s] && bwd[s]) remap[s] = next++;
  if (remap[0] != 0)
    throw ValidationError("connect: no path from start to a final state");
  std::vector<Arc> arcs;
  for (const Arc& a : fsa.arcs)
    if (remap[a.src] >= 0 && remap[a.dst] >= 0)
      arcs.push_back({remap[a.src], remap[a.dst], a.label, a.score});
  std::map<StateId, double> finals;
  for (const auto& [s, w] : fsa.finals)
    if (remap[s] >= 0) finals[remap[s]] = w;
  return make_fsa(next, std::move(arcs), std::move(finals));
}

// Removes label-0 (epsilon) arcs, preserving the total log-probability of
// every label sequence (log semiring). Requires the epsilon subgraph to be
// acyclic. Parallel arcs with equal (dst, label) are merged by log-add.
// The result is trimmed with connect().
inline Fsa remove_epsilons(const Fsa& fsa) {
  // Epsilon closure per state via DFS memoization on the eps subgraph.
  std::vector<std::map<StateId, double>> closure(fsa.num_states);
  std::vector<uint8_t> state(fsa.num_states, 0);  // 0 new, 1 in, 2 done
  auto dfs = [&](auto&& self, StateId s) -> void {
    if (state[s] == 2) return;
    if (state[s] == 1)
      throw ValidationError("remove_epsilons: epsilon cycle");
    state[s] = 1;
    std::map<StateId, double>& cl = closure[s];
    cl[s] = 0.0;
    for (const Arc* a = fsa.arcs_begin(s); a != fsa.arcs_end(s); ++a) {
      if (a->label != 0) continue;
      self(self, a->dst);
      for (const auto& [r, w] : closure[a->dst]) {
        auto it = cl.find(r);
        double v = a->score + w;
        if (it == cl.end())
          cl[r] = v;
        else
          it->second = log_add(it->second, v);
      }
    }
    state[s] = 2;
  };
  for (StateId s = 0; s < fsa.num_states; ++s) dfs(dfs, s);

  std::vector<Arc> arcs;
  std::map<StateId, double> finals;
  for (StateId s = 0; s < fsa.num_states; ++s) {
    std::map<std::pair<StateId, Label>, double> merged;
    double fin = kNegInf;
    for (const auto& [r, w] : closure[s]) {
      for (const Arc* a = fsa.arcs_begin(r); a != fsa.arcs_end(r); ++a) {
        if (a->label == 0) continue;
        auto k = std::make_pair(a->dst, a->label);
        auto it = merged.find(k);
        double v = w + a->score;
        if (it == merged.end())
          merged[k] = v;
        else
          it->second = log_add(it->second, v);
      }
      if (fsa.is_final(r)) fin = log_add(fin, w + fsa.final_score(r));
    }
    for (const auto& [k, v] : merged)
      arcs.push_back({s, k.first, k.second, v});
    if (fin != kNegInf) finals[s] = fin;
  }
  return connect(make_fsa(fsa.num_states, std::move(arcs), std::move(finals)));
}

}  // namespace rnnt

#endif  // RNNT_FSA_HPP_
