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

#ifndef RNNT_FSA_SEARCH_HPP_
#define RNNT_FSA_SEARCH_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>
#include <utility>
#include <vector>

#include "rnnt/fsa.hpp"
#include "rnnt/model.hpp"
#include "rnnt/ragged.hpp"
#include "rnnt/search.hpp"

namespace rnnt {

struct FsaSearchParams {
  double beam = 20.0;       // natural-log width, relative to per-stream best
  int32_t max_states = 64;
  int32_t max_contexts = 8;
};

// One surviving search tuple ((a,b), graph_state) at the stream's current
// frame, plus the lattice node that represents it.
struct StreamState {
  int32_t context = 0;  // packed a*V + b
  StateId graph_state = 0;
  double score = 0.0;
  int32_t lattice_node = 0;
};

namespace detail {

struct LatticePiece {
  int32_t src = 0;
  int32_t dst = 0;  // candidate index before pruning, node id after
  Label label = 0;
  double score = 0.0;
};

}  // namespace detail

// Per-utterance decoding state. The per-frame cycle is get_contexts ->
// (caller runs decoder + joiner) -> expand_arcs -> prune_streams; the
// lattice grows one node layer per frame.
struct DecodeStream {
  const Fsa* graph = nullptr;
  FsaSearchParams params;
  int32_t vocab_size = 0;
  int32_t t = 0;
  int32_t num_frames = 0;  // frames this stream will consume; driver-set
  bool done = false;

  std::vector<StreamState> active;  // sorted by (context, graph_state)
  std::vector<int32_t> distinct_contexts;  // packed, ascending; per frame

  // Between expand_arcs and prune_streams.
  std::vector<StreamState> candidates;  // sorted by (context, graph_state)
  std::vector<detail::LatticePiece> cand_arcs;  // dst = candidate index

  // Accepted lattice so far. Node 0 is the seed at frame 0.
  int32_t num_nodes = 1;
  std::vector<detail::LatticePiece> arcs;
  std::vector<int32_t> final_nodes;  // filled when the stream finishes
};

inline void check_fsa_search_params(const FsaSearchParams& p) {
  if (!(p.beam >= 0.0))
    throw ValidationError("fsa search beam must be >= 0");
  if (p.max_states < 1)
    throw ValidationError("max_states must be >= 1");
  if (p.max_contexts < 1)
    throw ValidationError("max_contexts must be >= 1");
}

// Seeds one stream per graph with the tuple ((0,0), start state, score 0).
// Graphs must be epsilon-free (no label-0 arcs) with labels inside the
// model vocabulary.
inline std::vector<DecodeStream> init_streams(const std::vector<Fsa>& graphs,
                                              const FsaSearchParams& params,
                                              int32_t vocab_size) {
  check_fsa_search_params(params);
  if (vocab_size < 2) throw ValidationError("vocab_size must be >= 2");
  std::vector<DecodeStream> streams;
  streams.reserve(graphs.size());
  for (const Fsa& g : graphs) {
    for (const Arc& a : g.arcs) {
      if (a.label == 0)
        throw ValidationError(
            "decoding graph contains a blank/epsilon (label 0) arc");
      if (a.label >= vocab_size)
        throw ValidationError("decoding graph label " +
                              std::to_string(a.label) +
                              " outside model vocabulary");
    }
    DecodeStream s;
    s.graph = &g;
    s.params = params;
    s.vocab_size = vocab_size;
    s.active.push_back(StreamState{0, 0, 0.0, 0});
    streams.push_back(std::move(s));
  }
  return streams;
}

// Distinct active contexts per stream (done streams contribute none),
// as a ragged shape plus an n x 2 matrix of unpacked (a, b) rows.
inline std::pair<RaggedShape, Mat<int32_t>> get_contexts(
    std::vector<DecodeStream>& streams) {
  std::vector<int32_t> counts;
  counts.reserve(streams.size());
  int32_t total = 0;
  for (DecodeStream& s : streams) {
    s.distinct_contexts.clear();
    if (!s.done) {
      int32_t prev = -1;
      for (const StreamState& st : s.active) {
        if (st.context != prev) {
          s.distinct_contexts.push_back(st.context);
          prev = st.context;
        }
      }
    }
    counts.push_back(static_cast<int32_t>(s.distinct_contexts.size()));
    total += counts.back();
  }
  RaggedShape shape = build_ragged(counts);
  Mat<int32_t> ctx(total, 2);
  int32_t r = 0;
  for (const DecodeStream& s : streams)
    for (int32_t packed : s.distinct_contexts) {
      auto [a, b] = unpack_context(packed, s.vocab_size);
      ctx.at(r, 0) = a;
      ctx.at(r, 1) = b;
      ++r;
    }
  return {std::move(shape), std::move(ctx)};
}

// Builds every next-frame candidate without pruning. Each active tuple
// spawns a blank self-transition (score += lp[blank]) and one candidate per
// outgoing graph arc (score += arc weight + lp[label], context shifts).
// Duplicate (context, graph_state) targets keep the max score; every
// incoming transition is retained as a lattice arc candidate.
inline void expand_arcs(std::vector<DecodeStream>& streams,
                        const RaggedShape& shape,
                        const Mat<double>& logprobs) {
  if (shape.num_rows() != static_cast<int32_t>(streams.size()))
    throw std::logic_error("expand_arcs: shape rows != streams");
  if (shape.num_elements() != logprobs.rows)
    throw std::logic_error("expand_arcs: log-prob rows != context count");
  const int32_t V_from_rows = logprobs.cols;

  for (size_t i = 0; i < streams.size(); ++i) {
    DecodeStream& s = streams[i];
    s.candidates.clear();
    s.cand_arcs.clear();
    if (s.done || s.active.empty()) continue;
    if (V_from_rows != s.vocab_size)
      throw std::logic_error("expand_arcs: log-prob columns != vocab size");
    const int32_t row0 = shape.row_splits[i];
    if (shape.row_splits[i + 1] - row0 !=
        static_cast<int32_t>(s.distinct_contexts.size()))
      throw std::logic_error("expand_arcs: stale get_contexts data");

    using Key = std::pair<int32_t, StateId>;  // (context, graph_state)
    std::map<Key, double> best;
    std::vector<std::tuple<Key, detail::LatticePiece>> raw;
    const int32_t V = s.vocab_size;

    for (const StreamState& st : s.active) {
      auto it = std::lower_bound(s.distinct_contexts.begin(),
                                 s.distinct_contexts.end(), st.context);
      int32_t row =
          row0 + static_cast<int32_t>(it - s.distinct_contexts.begin());
      const double* lp = logprobs.row(row);

      auto offer = [&](int32_t ctx, StateId gs, double score, Label label,
                       double arc_score) {
        Key k{ctx, gs};
        auto [bit, fresh] = best.try_emplace(k, score);
        if (!fresh) bit->second = std::max(bit->second, score);
        raw.emplace_back(k, detail::LatticePiece{st.lattice_node, 0, label,
                                                 arc_score});
      };

      offer(st.context, st.graph_state, st.score + lp[0], 0, lp[0]);
      const Fsa& g = *s.graph;
      for (const Arc* a = g.arcs_begin(st.graph_state);
           a != g.arcs_end(st.graph_state); ++a) {
        int32_t new_ctx = (st.context % V) * V + a->label;
        double arc_score = a->score + lp[a->label];
        offer(new_ctx, a->dst, st.score + arc_score, a->label, arc_score);
      }
    }

    std::map<Key, int32_t> index;
    for (const auto& [k, sc] : best) {
      index[k] = static_cast<int32_t>(s.candidates.size());
      s.candidates.push_back(StreamState{k.first, k.second, sc, -1});
    }
    for (auto& [k, piece] : raw) {
      piece.dst = index.at(k);
      s.cand_arcs.push_back(piece);
    }
  }
}

// Two pruning passes per stream: (1) beam relative to the frame's best plus
// a max_states cap, (2) a max_contexts cap ranking contexts by their best
// member. Ties prefer the smaller packed context, then the smaller graph
// state. Survivors become next-frame active states and receive lattice
// nodes; arcs into dropped candidates are discarded.
inline void prune_streams(std::vector<DecodeStream>& streams) {
  for (DecodeStream& s : streams) {
    if (s.done) continue;
    if (s.candidates.empty()) {
      // Nothing reachable (dead graph state set); the stream ends early
      // and its lattice simply has no complete path.
      s.active.clear();
      s.done = true;
      continue;
    }
    std::vector<StreamState> sorted = s.candidates;
    std::sort(sorted.begin(), sorted.end(),
              [](const StreamState& a, const StreamState& b) {
                if (a.score != b.score) return a.score > b.score;
                if (a.context != b.context) return a.context < b.context;
                return a.graph_state < b.graph_state;
              });
    const double best_score = sorted.front().score;
    const double floor = best_score - s.params.beam;
    std::vector<StreamState> pass1;
    for (const StreamState& st : sorted) {
      if (st.score < floor) continue;
      pass1.push_back(st);
      if (static_cast<int32_t>(pass1.size()) == s.params.max_states) break;
    }

    // pass1 is score-ordered, so distinct contexts in encounter order are
    // already ranked by their best member (ties by smaller context).
    std::vector<int32_t> kept_contexts;
    for (const StreamState& st : pass1) {
      if (std::find(kept_contexts.begin(), kept_contexts.end(), st.context) ==
          kept_contexts.end()) {
        if (static_cast<int32_t>(kept_contexts.size()) <
            s.params.max_contexts) {
          kept_contexts.push_back(st.context);
        }
      }
    }
    std::vector<StreamState> survivors;
    for (const StreamState& st : pass1)
      if (std::find(kept_contexts.begin(), kept_contexts.end(), st.context) !=
          kept_contexts.end())
        survivors.push_back(st);

    std::sort(survivors.begin(), survivors.end(),
              [](const StreamState& a, const StreamState& b) {
                return std::make_pair(a.context, a.graph_state) <
                       std::make_pair(b.context, b.graph_state);
              });
    std::map<std::pair<int32_t, StateId>, int32_t> node_of;
    for (StreamState& st : survivors) {
      st.lattice_node = s.num_nodes++;
      node_of[{st.context, st.graph_state}] = st.lattice_node;
    }
    for (const detail::LatticePiece& piece : s.cand_arcs) {
      const StreamState& cand = s.candidates[piece.dst];
      auto it = node_of.find({cand.context, cand.graph_state});
      if (it == node_of.end()) continue;
      s.arcs.push_back(
          detail::LatticePiece{piece.src, it->second, piece.label,
                               piece.score});
    }
    s.active = std::move(survivors);
    s.candidates.clear();
    s.cand_arcs.clear();
    s.t++;
  }
}

namespace detail {

inline void finish_stream(DecodeStream& s) {
  for (const StreamState& st : s.active) s.final_nodes.push_back(st.lattice_node);
  s.done = true;
}

// Assembles the stream's growing lattice into an Fsa: all accepted arcs
// plus zero-score blank arcs from every final-frame state into one
// super-final node, which carries final score 0.
inline Fsa build_lattice(const DecodeStream& s) {
  int32_t super = s.num_nodes;
  std::vector<Arc> arcs;
  arcs.reserve(s.arcs.size() + s.final_nodes.size());
  for (const LatticePiece& p : s.arcs)
    arcs.push_back({p.src, p.dst, p.label, p.score});
  for (int32_t n : s.final_nodes) arcs.push_back({n, super, 0, 0.0});
  return make_fsa(s.num_nodes + 1, std::move(arcs), {{super, 0.0}});
}

}  // namespace detail

// Parallel beam search over one decoding graph per utterance. Per frame:
// gather distinct contexts across all streams, run the decoder once on the
// whole batch, pick each stream's current encoder frame by the shape's
// row ids, run the joiner per (stream, context) row, expand, prune.
// Streams finish at their own frame counts. Returns one lattice per stream.
inline std::vector<Fsa> fsa_beam_search(const ToyTransducer& m,
                                        const std::vector<Mat<float>>& batch,
                                        const std::vector<Fsa>& graphs,
                                        const FsaSearchParams& params) {
  if (batch.size() != graphs.size())
    throw ValidationError("fsa_beam_search: |batch| != |graphs|");
  const int32_t V = m.cfg.vocab_size;
  const int32_t J = m.cfg.joiner_dim;
  std::vector<DecodeStream> streams = init_streams(graphs, params, V);

  std::vector<Mat<float>> pe(batch.size());
  for (size_t i = 0; i < batch.size(); ++i) {
    Mat<float> enc = encoder_forward(m, batch[i]);
    streams[i].num_frames = enc.rows;
    pe[i] = Mat<float>(enc.rows, J);
    for (int32_t t = 0; t < enc.rows; ++t)
      joiner_project_enc(m, enc.row(t), pe[i].row(t));
    if (streams[i].num_frames == 0) detail::finish_stream(streams[i]);
  }

  std::vector<float> logits(V);
  std::vector<float> pd(J);
  while (true) {
    bool any_running = false;
    for (const DecodeStream& s : streams)
      if (!s.done) any_running = true;
    if (!any_running) break;

    auto [shape, ctx_rows] = get_contexts(streams);
    const int32_t n = shape.num_elements();
    if (n == 0) break;

    std::vector<int32_t> packed(n);
    {
      int32_t r = 0;
      for (const DecodeStream& s : streams)
        for (int32_t c : s.distinct_contexts) packed[r++] = c;
    }
    Mat<float> dec = decoder_forward(m, packed);

    Mat<double> logprobs(n, V);
    for (int32_t r = 0; r < n; ++r) {
      int32_t stream_idx = shape.row_ids[r];
      const DecodeStream& s = streams[stream_idx];
      joiner_project_dec(m, dec.row(r), pd.data());
      joiner_logits_from_proj(m, pe[stream_idx].row(s.t), pd.data(),
                              logits.data());
      detail::log_softmax_row(logits.data(), V, logprobs.row(r));
    }

    expand_arcs(streams, shape, logprobs);
    prune_streams(streams);
    for (DecodeStream& s : streams)
      if (!s.done && s.t == s.num_frames) detail::finish_stream(s);
  }

  std::vector<Fsa> lattices;
  lattices.reserve(streams.size());
  for (const DecodeStream& s : streams)
    lattices.push_back(detail::build_lattice(s));
  return lattices;
}

// Best label sequence from a lattice. max: blank-stripped tropical best
// path. log_add: sample nbest_n paths, deduplicate blank-free sequences,
// score each by its total log-probability over all alignments, pick the
// argmax (ties toward the lexicographically smallest sequence). A lattice
// with no complete path yields an empty sequence.
inline std::vector<int32_t> lattice_to_best_seq(const Fsa& lattice,
                                                MergeOp method,
                                                int32_t nbest_n = 100,
                                                uint64_t seed = 0) {
  if (method == MergeOp::kMax) {
    Path p;
    try {
      p = best_path(lattice);
    } catch (const ValidationError&) {
      return {};
    }
    std::vector<int32_t> ys;
    for (Label l : p.labels)
      if (l != 0) ys.push_back(l);
    return ys;
  }
  if (nbest_n < 1) throw ValidationError("nbest_n must be >= 1");
  std::vector<Path> paths = sample_nbest(lattice, nbest_n, seed);
  if (paths.empty()) return {};
  std::vector<std::vector<Label>> seqs = remove_blanks_unique(paths);
  std::vector<int32_t> best_seq;
  double best_lp = kNegInf;
  bool first = true;
  for (const std::vector<Label>& seq : seqs) {
    double lp = sequence_total_logprob(lattice, seq);
    if (first || lp > best_lp || (lp == best_lp && seq < best_seq)) {
      best_seq = seq;
      best_lp = lp;
      first = false;
    }
  }
  return best_seq;
}

// Text form of a lattice with a per-stream comment header.
inline std::string serialize_lattice(const Fsa& lattice, int32_t stream_index,
                                     int32_t num_frames) {
  std::string out = "# stream=" + std::to_string(stream_index) +
                    " frames=" + std::to_string(num_frames) + "\n";
  out += serialize_fsa_text(lattice);
  return out;
}

}  // namespace rnnt

#endif  // RNNT_FSA_SEARCH_HPP_
