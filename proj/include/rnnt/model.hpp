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

#ifndef RNNT_MODEL_HPP_
#define RNNT_MODEL_HPP_

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rnnt/common.hpp"
#include "rnnt/loss.hpp"

namespace rnnt {

struct ModelConfig {
  int32_t vocab_size = 6;   // includes blank 0
  int32_t feat_dim = 6;
  int32_t enc_dim = 16;
  int32_t emb_dim = 64;
  int32_t joiner_dim = 16;
  int32_t context_size = 2;
  uint64_t seed = 0;

  bool operator==(const ModelConfig& o) const {
    return vocab_size == o.vocab_size && feat_dim == o.feat_dim &&
           enc_dim == o.enc_dim && emb_dim == o.emb_dim &&
           joiner_dim == o.joiner_dim && context_size == o.context_size &&
           seed == o.seed;
  }
};

inline void check_config(const ModelConfig& c) {
  if (c.vocab_size < 2)
    throw ValidationError("vocab_size must be >= 2 (blank plus one token)");
  if (c.context_size != 2)
    throw ValidationError("context_size must be 2");
  if (c.feat_dim < 1 || c.enc_dim < 1 || c.emb_dim < 1 || c.joiner_dim < 1)
    throw ValidationError("model dims must be >= 1");
}

// Stateless transducer, all float32:
//   encoder: two affine+tanh layers applied per frame;
//   decoder: 2-token context, embeddings concatenated, affine+tanh;
//   joiner: project both sides to joiner_dim, sum+bias, tanh, affine to V.
// The two *_head parameter sets are per-side projections to V used by the
// trivial joiner (log-prob rows from one side alone).
struct ToyTransducer {
  ModelConfig cfg;
  Mat<float> enc_w1, enc_b1;    // enc_dim x feat_dim, 1 x enc_dim
  Mat<float> enc_w2, enc_b2;    // enc_dim x enc_dim, 1 x enc_dim
  Mat<float> emb;               // V x emb_dim
  Mat<float> ctx_w, ctx_b;      // emb_dim x 2*emb_dim, 1 x emb_dim
  Mat<float> j_we;              // joiner_dim x enc_dim
  Mat<float> j_wd;              // joiner_dim x emb_dim
  Mat<float> j_b;               // 1 x joiner_dim
  Mat<float> out_w, out_b;      // V x joiner_dim, 1 x V
  Mat<float> eh_w, eh_b;        // V x enc_dim, 1 x V
  Mat<float> dh_w, dh_b;        // V x emb_dim, 1 x V

  // Fixed enumeration order; checkpointing and SGD iterate this.
  std::vector<std::pair<std::string, Mat<float>*>> param_views() {
    return {{"enc_w1", &enc_w1}, {"enc_b1", &enc_b1}, {"enc_w2", &enc_w2},
            {"enc_b2", &enc_b2}, {"emb", &emb},       {"ctx_w", &ctx_w},
            {"ctx_b", &ctx_b},   {"j_we", &j_we},     {"j_wd", &j_wd},
            {"j_b", &j_b},       {"out_w", &out_w},   {"out_b", &out_b},
            {"eh_w", &eh_w},     {"eh_b", &eh_b},     {"dh_w", &dh_w},
            {"dh_b", &dh_b}};
  }
  std::vector<std::pair<std::string, const Mat<float>*>> param_views() const {
    auto views = const_cast<ToyTransducer*>(this)->param_views();
    std::vector<std::pair<std::string, const Mat<float>*>> out;
    out.reserve(views.size());
    for (auto& [n, p] : views) out.emplace_back(n, p);
    return out;
  }
};

namespace detail {

inline void fill_uniform(Mat<float>& m, int32_t fan_in, DetRng& rng) {
  double s = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (float& x : m.data) x = static_cast<float>(rng.uniform(-s, s));
}

// y = W x + b, sizes W: out x in, b: 1 x out.
inline void affine(const Mat<float>& w, const Mat<float>& b, const float* x,
                   float* y) {
  for (int32_t r = 0; r < w.rows; ++r) {
    const float* wr = w.row(r);
    float acc = b.row(0)[r];
    for (int32_t c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    y[r] = acc;
  }
}

inline void tanh_inplace(float* x, int32_t n) {
  for (int32_t i = 0; i < n; ++i) x[i] = std::tanh(x[i]);
}

// log-softmax with a double accumulator; out may be float or double.
template <typename Out>
inline void log_softmax_row(const float* logits, int32_t n, Out* out) {
  float m = logits[0];
  for (int32_t i = 1; i < n; ++i) m = std::max(m, logits[i]);
  double sum = 0.0;
  for (int32_t i = 0; i < n; ++i)
    sum += std::exp(static_cast<double>(logits[i]) - m);
  double lse = static_cast<double>(m) + std::log(sum);
  for (int32_t i = 0; i < n; ++i)
    out[i] = static_cast<Out>(static_cast<double>(logits[i]) - lse);
}

}  // namespace detail

inline ToyTransducer init_model(const ModelConfig& cfg) {
  check_config(cfg);
  ToyTransducer m;
  m.cfg = cfg;
  const int32_t V = cfg.vocab_size;
  m.enc_w1 = Mat<float>(cfg.enc_dim, cfg.feat_dim);
  m.enc_b1 = Mat<float>(1, cfg.enc_dim);
  m.enc_w2 = Mat<float>(cfg.enc_dim, cfg.enc_dim);
  m.enc_b2 = Mat<float>(1, cfg.enc_dim);
  m.emb = Mat<float>(V, cfg.emb_dim);
  m.ctx_w = Mat<float>(cfg.emb_dim, 2 * cfg.emb_dim);
  m.ctx_b = Mat<float>(1, cfg.emb_dim);
  m.j_we = Mat<float>(cfg.joiner_dim, cfg.enc_dim);
  m.j_wd = Mat<float>(cfg.joiner_dim, cfg.emb_dim);
  m.j_b = Mat<float>(1, cfg.joiner_dim);
  m.out_w = Mat<float>(V, cfg.joiner_dim);
  m.out_b = Mat<float>(1, V);
  m.eh_w = Mat<float>(V, cfg.enc_dim);
  m.eh_b = Mat<float>(1, V);
  m.dh_w = Mat<float>(V, cfg.emb_dim);
  m.dh_b = Mat<float>(1, V);

  DetRng rng(cfg.seed);
  detail::fill_uniform(m.enc_w1, cfg.feat_dim, rng);
  detail::fill_uniform(m.enc_b1, cfg.feat_dim, rng);
  detail::fill_uniform(m.enc_w2, cfg.enc_dim, rng);
  detail::fill_uniform(m.enc_b2, cfg.enc_dim, rng);
  detail::fill_uniform(m.emb, cfg.emb_dim, rng);
  detail::fill_uniform(m.ctx_w, 2 * cfg.emb_dim, rng);
  detail::fill_uniform(m.ctx_b, 2 * cfg.emb_dim, rng);
  detail::fill_uniform(m.j_we, cfg.enc_dim, rng);
  detail::fill_uniform(m.j_wd, cfg.emb_dim, rng);
  detail::fill_uniform(m.j_b, cfg.enc_dim, rng);
  detail::fill_uniform(m.out_w, cfg.joiner_dim, rng);
  detail::fill_uniform(m.out_b, cfg.joiner_dim, rng);
  detail::fill_uniform(m.eh_w, cfg.enc_dim, rng);
  detail::fill_uniform(m.eh_b, cfg.enc_dim, rng);
  detail::fill_uniform(m.dh_w, cfg.emb_dim, rng);
  detail::fill_uniform(m.dh_b, cfg.emb_dim, rng);
  return m;
}

// ToyTransducer is an aggregate, so a caller can hand the forward paths a
// model whose matrices were never sized. Checked at every forward entry:
// shapes disagreeing with cfg mean the model skipped init_model/checkpoint.
inline void check_model_shapes(const ToyTransducer& m) {
  check_config(m.cfg);
  const int32_t V = m.cfg.vocab_size;
  const std::pair<const Mat<float>*, std::pair<int32_t, int32_t>> want[] = {
      {&m.enc_w1, {m.cfg.enc_dim, m.cfg.feat_dim}},
      {&m.enc_b1, {1, m.cfg.enc_dim}},
      {&m.enc_w2, {m.cfg.enc_dim, m.cfg.enc_dim}},
      {&m.enc_b2, {1, m.cfg.enc_dim}},
      {&m.emb, {V, m.cfg.emb_dim}},
      {&m.ctx_w, {m.cfg.emb_dim, 2 * m.cfg.emb_dim}},
      {&m.ctx_b, {1, m.cfg.emb_dim}},
      {&m.j_we, {m.cfg.joiner_dim, m.cfg.enc_dim}},
      {&m.j_wd, {m.cfg.joiner_dim, m.cfg.emb_dim}},
      {&m.j_b, {1, m.cfg.joiner_dim}},
      {&m.out_w, {V, m.cfg.joiner_dim}},
      {&m.out_b, {1, V}},
      {&m.eh_w, {V, m.cfg.enc_dim}},
      {&m.eh_b, {1, V}},
      {&m.dh_w, {V, m.cfg.emb_dim}},
      {&m.dh_b, {1, V}}};
  for (const auto& [p, shape] : want)
    if (p->rows != shape.first || p->cols != shape.second ||
        p->data.size() != static_cast<size_t>(shape.first) * shape.second)
      throw ValidationError(
          "model parameter shapes do not match config; construct models "
          "with init_model or load_checkpoint");
}

// 2-token context packing. Initial context is (blank, blank) = (0, 0).
inline int32_t pack_context(int32_t a, int32_t b, int32_t vocab_size) {
  if (a < 0 || a >= vocab_size || b < 0 || b >= vocab_size)
    throw ValidationError("context token out of range");
  return a * vocab_size + b;
}

inline std::pair<int32_t, int32_t> unpack_context(int32_t packed,
                                                  int32_t vocab_size) {
  if (packed < 0 || packed >= vocab_size * vocab_size)
    throw ValidationError("packed context out of range");
  return {packed / vocab_size, packed % vocab_size};
}

// Context after consuming the first `prefix_len` tokens of ys.
inline int32_t context_of_prefix(const std::vector<int32_t>& ys,
                                 size_t prefix_len, int32_t vocab_size) {
  int32_t a = prefix_len >= 2 ? ys[prefix_len - 2] : 0;
  int32_t b = prefix_len >= 1 ? ys[prefix_len - 1] : 0;
  return pack_context(a, b, vocab_size);
}

inline Mat<float> encoder_forward(const ToyTransducer& m,
                                  const Mat<float>& features) {
  check_model_shapes(m);
  if (features.cols != m.cfg.feat_dim)
    throw ValidationError("features must have feat_dim columns");
  Mat<float> out(features.rows, m.cfg.enc_dim);
  std::vector<float> h(m.cfg.enc_dim);
  for (int32_t t = 0; t < features.rows; ++t) {
    detail::affine(m.enc_w1, m.enc_b1, features.row(t), h.data());
    detail::tanh_inplace(h.data(), m.cfg.enc_dim);
    detail::affine(m.enc_w2, m.enc_b2, h.data(), out.row(t));
    detail::tanh_inplace(out.row(t), m.cfg.enc_dim);
  }
  return out;
}

// Row i is a pure function of contexts[i]; batching cannot change values.
inline Mat<float> decoder_forward(const ToyTransducer& m,
                                  const std::vector<int32_t>& packed_contexts) {
  check_model_shapes(m);
  const int32_t V = m.cfg.vocab_size;
  const int32_t E = m.cfg.emb_dim;
  Mat<float> out(static_cast<int32_t>(packed_contexts.size()), E);
  std::vector<float> cat(2 * E);
  for (size_t i = 0; i < packed_contexts.size(); ++i) {
    auto [a, b] = unpack_context(packed_contexts[i], V);
    const float* ea = m.emb.row(a);
    const float* eb = m.emb.row(b);
    std::copy(ea, ea + E, cat.data());
    std::copy(eb, eb + E, cat.data() + E);
    float* o = out.row(static_cast<int32_t>(i));
    detail::affine(m.ctx_w, m.ctx_b, cat.data(), o);
    detail::tanh_inplace(o, E);
  }
  return out;
}

// Joiner pieces. Decoding paths share these so that batched and unbatched
// searches see bit-identical numbers.
inline void joiner_project_enc(const ToyTransducer& m, const float* enc_row,
                               float* out) {
  for (int32_t r = 0; r < m.cfg.joiner_dim; ++r) {
    const float* wr = m.j_we.row(r);
    float acc = 0.0f;
    for (int32_t c = 0; c < m.cfg.enc_dim; ++c) acc += wr[c] * enc_row[c];
    out[r] = acc;
  }
}

inline void joiner_project_dec(const ToyTransducer& m, const float* dec_row,
                               float* out) {
  for (int32_t r = 0; r < m.cfg.joiner_dim; ++r) {
    const float* wr = m.j_wd.row(r);
    float acc = 0.0f;
    for (int32_t c = 0; c < m.cfg.emb_dim; ++c) acc += wr[c] * dec_row[c];
    out[r] = acc;
  }
}

// logits = out_w tanh(pe + pd + j_b) + out_b; pe/pd from the projections.
inline void joiner_logits_from_proj(const ToyTransducer& m, const float* pe,
                                    const float* pd, float* logits) {
  const int32_t J = m.cfg.joiner_dim;
  float h[512];
  if (J > 512) throw ValidationError("joiner_dim too large");
  for (int32_t i = 0; i < J; ++i)
    h[i] = std::tanh(pe[i] + pd[i] + m.j_b.row(0)[i]);
  detail::affine(m.out_w, m.out_b, h, logits);
}

inline void joiner_logits(const ToyTransducer& m, const float* enc_row,
                          const float* dec_row, float* logits) {
  std::vector<float> pe(m.cfg.joiner_dim), pd(m.cfg.joiner_dim);
  joiner_project_enc(m, enc_row, pe.data());
  joiner_project_dec(m, dec_row, pd.data());
  joiner_logits_from_proj(m, pe.data(), pd.data(), logits);
}

inline std::vector<float> joiner_forward(const ToyTransducer& m,
                                         const float* enc_row,
                                         const float* dec_row) {
  std::vector<float> logits(m.cfg.vocab_size);
  joiner_logits(m, enc_row, dec_row, logits.data());
  std::vector<float> lp(m.cfg.vocab_size);
  detail::log_softmax_row(logits.data(), m.cfg.vocab_size, lp.data());
  return lp;
}

namespace detail {

inline void check_targets(const std::vector<int32_t>& targets,
                          int32_t vocab_size) {
  for (int32_t y : targets)
    if (y <= 0 || y >= vocab_size)
      throw ValidationError("target token out of range (blank forbidden)");
}

}  // namespace detail

// Joiner log-probs for every (frame, target-prefix) pair, as the losses
// consume them. Encoder and decoder projections are computed once per row
// and reused, which matches pointwise joiner_forward calls bit-for-bit.
inline LogProbGrid full_grid(const ToyTransducer& m, const Mat<float>& features,
                             const std::vector<int32_t>& targets) {
  detail::check_targets(targets, m.cfg.vocab_size);
  const int32_t T = features.rows;
  const int32_t U = static_cast<int32_t>(targets.size());
  const int32_t V = m.cfg.vocab_size;
  const int32_t J = m.cfg.joiner_dim;
  if (T < 1) throw ValidationError("features must have at least one frame");

  Mat<float> enc = encoder_forward(m, features);
  std::vector<int32_t> contexts(U + 1);
  for (int32_t u = 0; u <= U; ++u)
    contexts[u] = context_of_prefix(targets, u, V);
  Mat<float> dec = decoder_forward(m, contexts);

  Mat<float> pe(T, J), pd(U + 1, J);
  for (int32_t t = 0; t < T; ++t) joiner_project_enc(m, enc.row(t), pe.row(t));
  for (int32_t u = 0; u <= U; ++u)
    joiner_project_dec(m, dec.row(u), pd.row(u));

  LogProbGrid grid;
  grid.T = T;
  grid.U = U;
  grid.blank_lp = Mat<double>(T, U + 1);
  grid.symbol_lp = Mat<double>(T, U);
  std::vector<float> logits(V);
  std::vector<double> lp(V);
  for (int32_t t = 0; t < T; ++t) {
    for (int32_t u = 0; u <= U; ++u) {
      joiner_logits_from_proj(m, pe.row(t), pd.row(u), logits.data());
      detail::log_softmax_row(logits.data(), V, lp.data());
      grid.blank_lp.at(t, u) = std::min(0.0, lp[0]);
      if (u < U) grid.symbol_lp.at(t, u) = std::min(0.0, lp[targets[u]]);
    }
  }
  return grid;
}

// Per-side log-prob rows for the trivial joiner.
inline Mat<double> enc_logprob_rows(const ToyTransducer& m,
                                    const Mat<float>& enc_out) {
  if (enc_out.cols != m.cfg.enc_dim)
    throw ValidationError("enc_out must have enc_dim columns");
  Mat<double> out(enc_out.rows, m.cfg.vocab_size);
  std::vector<float> logits(m.cfg.vocab_size);
  for (int32_t t = 0; t < enc_out.rows; ++t) {
    detail::affine(m.eh_w, m.eh_b, enc_out.row(t), logits.data());
    detail::log_softmax_row(logits.data(), m.cfg.vocab_size, out.row(t));
  }
  return out;
}

inline Mat<double> dec_logprob_rows(const ToyTransducer& m,
                                    const Mat<float>& dec_out) {
  if (dec_out.cols != m.cfg.emb_dim)
    throw ValidationError("dec_out must have emb_dim columns");
  Mat<double> out(dec_out.rows, m.cfg.vocab_size);
  std::vector<float> logits(m.cfg.vocab_size);
  for (int32_t u = 0; u < dec_out.rows; ++u) {
    detail::affine(m.dh_w, m.dh_b, dec_out.row(u), logits.data());
    detail::log_softmax_row(logits.data(), m.cfg.vocab_size, out.row(u));
  }
  return out;
}

}  // namespace rnnt

#endif  // RNNT_MODEL_HPP_
