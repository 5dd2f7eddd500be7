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

#ifndef RNNT_SEARCH_HPP_
#define RNNT_SEARCH_HPP_

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rnnt/model.hpp"

namespace rnnt {

// Sentinel for "no per-frame symbol limit" (S = infinity).
inline constexpr int32_t kNoSymbolLimit = std::numeric_limits<int32_t>::max();
// Hard cap on symbols per frame when S is unlimited, so a blank-starved
// model cannot hang the decoder.
inline constexpr int32_t kMaxSymbolsPerFrameSafety = 10;

enum class MergeOp { kMax, kLogAdd };

struct Hypothesis {
  std::vector<int32_t> ys;  // blank-free emitted tokens, full history
  double score = 0.0;       // accumulated log-probability
  int32_t n = 0;            // symbols emitted on the current frame
};

struct SearchParams {
  int32_t max_symbols = 1;  // S; kNoSymbolLimit = unlimited
  int32_t beam_size = 4;
  MergeOp merge_op = MergeOp::kMax;
  bool length_norm = false;
  int32_t max_total_symbols = 0;  // 0 = uncapped; bounds |ys| when positive
};

namespace detail {

inline int32_t effective_frame_symbol_cap(int32_t max_symbols) {
  return max_symbols == kNoSymbolLimit ? kMaxSymbolsPerFrameSafety
                                       : max_symbols;
}

// First maximum wins, so blank (index 0) beats tokens on ties and smaller
// token ids beat larger ones.
inline int32_t argmax_row(const float* x, int32_t n) {
  int32_t best = 0;
  for (int32_t i = 1; i < n; ++i)
    if (x[i] > x[best]) best = i;
  return best;
}

}  // namespace detail

// Max-symbols greedy decoding: per frame, repeatedly take the argmax of the
// joiner logits; a token emission advances the decoder context and stays on
// the frame until blank or the S-th emission. After S symbols the frame
// advances with blank probability taken as 1 (no score factor; greedy
// tracks no scores). capped_frames counts frames stopped by the safety cap
// when S is unlimited.
inline std::vector<int32_t> greedy_search(const ToyTransducer& m,
                                          const Mat<float>& features,
                                          int32_t max_symbols,
                                          int64_t* capped_frames = nullptr) {
  if (max_symbols < 1) throw ValidationError("max_symbols must be >= 1");
  const int32_t V = m.cfg.vocab_size;
  const int32_t cap = detail::effective_frame_symbol_cap(max_symbols);
  Mat<float> enc = encoder_forward(m, features);
  std::vector<int32_t> ys;
  std::vector<float> logits(V);
  if (capped_frames) *capped_frames = 0;
  for (int32_t t = 0; t < enc.rows; ++t) {
    for (int32_t n = 0; n < cap; ++n) {
      int32_t ctx = context_of_prefix(ys, ys.size(), V);
      Mat<float> dec = decoder_forward(m, {ctx});
      joiner_logits(m, enc.row(t), dec.row(0), logits.data());
      int32_t k = detail::argmax_row(logits.data(), V);
      if (k == 0) break;
      ys.push_back(k);
      if (n + 1 == cap && max_symbols == kNoSymbolLimit && capped_frames)
        ++*capped_frames;
    }
  }
  return ys;
}

// Batched greedy, S = 1 only: one joiner call per stream per frame. Distinct
// contexts are deduplicated across streams and their decoder outputs and
// joiner projections cached for the whole batch, so repeated contexts cost
// one lookup. Results are exactly greedy_search(S=1) per stream: all score
// arithmetic goes through the same joiner routines.
inline std::vector<std::vector<int32_t>> greedy_search_batch(
    const ToyTransducer& m, const std::vector<Mat<float>>& batch,
    int32_t max_symbols = 1) {
  if (max_symbols != 1)
    throw ValidationError("greedy_search_batch supports max_symbols = 1 only");
  const int32_t V = m.cfg.vocab_size;
  const int32_t J = m.cfg.joiner_dim;
  const size_t N = batch.size();

  std::vector<Mat<float>> pe(N);  // per-stream per-frame enc projections
  std::vector<int32_t> frames(N);
  for (size_t i = 0; i < N; ++i) {
    Mat<float> enc = encoder_forward(m, batch[i]);
    frames[i] = enc.rows;
    pe[i] = Mat<float>(enc.rows, J);
    for (int32_t t = 0; t < enc.rows; ++t)
      joiner_project_enc(m, enc.row(t), pe[i].row(t));
  }

  // Batch-lifetime cache: packed context -> joiner-side decoder projection.
  std::unordered_map<int32_t, std::vector<float>> pd_cache;
  std::vector<int32_t> fresh;
  auto ensure_contexts = [&](const std::vector<int32_t>& wanted) {
    fresh.clear();
    for (int32_t ctx : wanted)
      if (pd_cache.emplace(ctx, std::vector<float>()).second)
        fresh.push_back(ctx);
    if (fresh.empty()) return;
    Mat<float> dec = decoder_forward(m, fresh);
    for (size_t i = 0; i < fresh.size(); ++i) {
      std::vector<float>& pd = pd_cache[fresh[i]];
      pd.resize(J);
      joiner_project_dec(m, dec.row(static_cast<int32_t>(i)), pd.data());
    }
  };

  std::vector<std::vector<int32_t>> ys(N);
  std::vector<int32_t> ctx(N);
  std::vector<int32_t> wanted;
  std::vector<float> logits(V);
  int32_t max_frames = 0;
  for (size_t i = 0; i < N; ++i) max_frames = std::max(max_frames, frames[i]);

  for (int32_t t = 0; t < max_frames; ++t) {
    wanted.clear();
    for (size_t i = 0; i < N; ++i) {
      if (t >= frames[i]) continue;
      ctx[i] = context_of_prefix(ys[i], ys[i].size(), V);
      wanted.push_back(ctx[i]);
    }
    ensure_contexts(wanted);
    for (size_t i = 0; i < N; ++i) {
      if (t >= frames[i]) continue;
      const std::vector<float>& pd = pd_cache[ctx[i]];
      joiner_logits_from_proj(m, pe[i].row(t), pd.data(), logits.data());
      int32_t k = detail::argmax_row(logits.data(), V);
      if (k != 0) ys[i].push_back(k);
    }
  }
  return ys;
}

namespace detail {

// score desc, then shorter ys, then lexicographically smaller ys.
inline bool hyp_better(const std::pair<std::vector<int32_t>, double>& a,
                       const std::pair<std::vector<int32_t>, double>& b) {
  if (a.second != b.second) return a.second > b.second;
  if (a.first.size() != b.first.size())
    return a.first.size() < b.first.size();
  return a.first < b.first;
}

inline void merge_into(std::map<std::vector<int32_t>, double>& set,
                       const std::vector<int32_t>& ys, double score,
                       MergeOp op) {
  auto [it, fresh] = set.try_emplace(ys, score);
  if (fresh) return;
  it->second = op == MergeOp::kMax ? std::max(it->second, score)
                                   : log_add(it->second, score);
}

inline void prune_to_beam(std::map<std::vector<int32_t>, double>& set,
                          int32_t beam_size) {
  if (static_cast<int32_t>(set.size()) <= beam_size) return;
  std::vector<std::pair<std::vector<int32_t>, double>> v(set.begin(),
                                                         set.end());
  std::sort(v.begin(), v.end(), hyp_better);
  set.clear();
  for (int32_t i = 0; i < beam_size; ++i)
    set.emplace(std::move(v[i].first), v[i].second);
}

}  // namespace detail

// Frame-synchronous beam search over (ys, score) hypotheses with at most S
// symbol emissions per frame. Hypotheses with equal ys merge at insertion
// (max keeps the best alignment, log_add sums alignments). A hypothesis
// that exhausts S advances to the next frame without a blank factor.
inline std::vector<int32_t> beam_search(const ToyTransducer& m,
                                        const Mat<float>& features,
                                        const SearchParams& params,
                                        int64_t* capped_frames = nullptr) {
  if (params.max_symbols < 1)
    throw ValidationError("max_symbols must be >= 1");
  if (params.beam_size < 1) throw ValidationError("beam_size must be >= 1");
  const int32_t V = m.cfg.vocab_size;
  const int32_t cap = detail::effective_frame_symbol_cap(params.max_symbols);
  Mat<float> enc = encoder_forward(m, features);
  if (capped_frames) *capped_frames = 0;

  std::map<std::vector<int32_t>, double> beam;
  beam[{}] = 0.0;
  std::vector<double> lp(V);
  std::vector<float> logits(V);

  for (int32_t t = 0; t < enc.rows; ++t) {
    std::map<std::vector<int32_t>, double> next_frame;
    std::map<std::vector<int32_t>, double> level = std::move(beam);
    beam.clear();
    for (int32_t n = 0; !level.empty(); ++n) {
      if (n == cap) {
        // Emission budget exhausted: forced advance, blank prob 1.
        for (const auto& [ys, score] : level)
          detail::merge_into(next_frame, ys, score, params.merge_op);
        if (params.max_symbols == kNoSymbolLimit && capped_frames)
          *capped_frames += 1;
        break;
      }
      std::map<std::vector<int32_t>, double> next_level;
      for (const auto& [ys, score] : level) {
        int32_t ctx = context_of_prefix(ys, ys.size(), V);
        Mat<float> dec = decoder_forward(m, {ctx});
        joiner_logits(m, enc.row(t), dec.row(0), logits.data());
        detail::log_softmax_row(logits.data(), V, lp.data());
        detail::merge_into(next_frame, ys, score + lp[0], params.merge_op);
        bool may_emit =
            params.max_total_symbols == 0 ||
            static_cast<int32_t>(ys.size()) < params.max_total_symbols;
        if (!may_emit) continue;
        std::vector<int32_t> ext = ys;
        ext.push_back(0);
        for (int32_t k = 1; k < V; ++k) {
          ext.back() = k;
          detail::merge_into(next_level, ext, score + lp[k], params.merge_op);
        }
      }
      detail::prune_to_beam(next_level, params.beam_size);
      level = std::move(next_level);
    }
    detail::prune_to_beam(next_frame, params.beam_size);
    beam = std::move(next_frame);
  }

  std::vector<int32_t> best_ys;
  double best_key = kNegInf;
  bool first = true;
  for (const auto& [ys, score] : beam) {
    double key = params.length_norm
                     ? score / std::max<size_t>(1, ys.size())
                     : score;
    std::pair<std::vector<int32_t>, double> cand{ys, key};
    std::pair<std::vector<int32_t>, double> cur{best_ys, best_key};
    if (first || detail::hyp_better(cand, cur)) {
      best_ys = ys;
      best_key = key;
      first = false;
    }
  }
  return best_ys;
}

// Exact best path of the S=1 search space restricted to the trivial graph:
// DP over (packed context, t), transitions blank (context unchanged) and
// token k (context shifts), each consuming one frame. Returns blank-free
// labels and the path score (termination at t=T costs nothing).
inline std::pair<std::vector<int32_t>, double> viterbi_oracle_s1(
    const ToyTransducer& m, const Mat<float>& features) {
  const int32_t V = m.cfg.vocab_size;
  const int32_t C = V * V;
  const int32_t J = m.cfg.joiner_dim;
  Mat<float> enc = encoder_forward(m, features);
  const int32_t T = enc.rows;

  std::vector<int32_t> all_ctx(C);
  for (int32_t c = 0; c < C; ++c) all_ctx[c] = c;
  Mat<float> dec = decoder_forward(m, all_ctx);
  Mat<float> pd(C, J);
  for (int32_t c = 0; c < C; ++c) joiner_project_dec(m, dec.row(c), pd.row(c));

  std::vector<double> dp(C, kNegInf), ndp(C, kNegInf);
  Mat<int32_t> from(T, C, -1), lab(T, C, -1);
  dp[pack_context(0, 0, V)] = 0.0;

  std::vector<float> peR(J), logits(V);
  std::vector<double> lp(V);
  for (int32_t t = 0; t < T; ++t) {
    joiner_project_enc(m, enc.row(t), peR.data());
    std::fill(ndp.begin(), ndp.end(), kNegInf);
    for (int32_t c = 0; c < C; ++c) {
      if (dp[c] == kNegInf) continue;
      joiner_logits_from_proj(m, peR.data(), pd.row(c), logits.data());
      detail::log_softmax_row(logits.data(), V, lp.data());
      double s0 = dp[c] + lp[0];
      if (s0 > ndp[c]) {
        ndp[c] = s0;
        from.at(t, c) = c;
        lab.at(t, c) = 0;
      }
      int32_t b = c % V;
      for (int32_t k = 1; k < V; ++k) {
        int32_t nc = b * V + k;
        double sk = dp[c] + lp[k];
        if (sk > ndp[nc]) {
          ndp[nc] = sk;
          from.at(t, nc) = c;
          lab.at(t, nc) = k;
        }
      }
    }
    dp.swap(ndp);
  }

  int32_t best_c = 0;
  for (int32_t c = 1; c < C; ++c)
    if (dp[c] > dp[best_c]) best_c = c;
  std::vector<int32_t> labels;
  int32_t c = best_c;
  for (int32_t t = T - 1; t >= 0; --t) {
    labels.push_back(lab.at(t, c));
    c = from.at(t, c);
  }
  std::reverse(labels.begin(), labels.end());
  std::vector<int32_t> ys;
  for (int32_t l : labels)
    if (l > 0) ys.push_back(l);
  return {ys, dp[best_c]};
}

}  // namespace rnnt

#endif  // RNNT_SEARCH_HPP_
