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

#ifndef RNNT_TRAIN_HPP_
#define RNNT_TRAIN_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "rnnt/dataset.hpp"
#include "rnnt/loss.hpp"
#include "rnnt/model.hpp"

namespace rnnt {

struct TrainOptions {
  Variant variant = Variant::kConstrained;
  double lm_scale = 0.25;
  double lambda_simple = 0.3;
  double lr = 0.1;
  int32_t epochs = 10;
  int32_t grad_accum = 4;  // items per update, mean-reduced
};

struct TrainStats {
  std::vector<double> epoch_mean_loss;
  int64_t skipped_items = 0;  // U > T under modified/constrained
  int64_t updates = 0;
};

namespace detail {

struct ModelGrads {
  Mat<float> enc_w1, enc_b1, enc_w2, enc_b2;
  Mat<float> emb, ctx_w, ctx_b;
  Mat<float> j_we, j_wd, j_b, out_w, out_b;
  Mat<float> eh_w, eh_b, dh_w, dh_b;

  explicit ModelGrads(const ToyTransducer& m)
      : enc_w1(m.enc_w1.rows, m.enc_w1.cols, 0.0f),
        enc_b1(m.enc_b1.rows, m.enc_b1.cols, 0.0f),
        enc_w2(m.enc_w2.rows, m.enc_w2.cols, 0.0f),
        enc_b2(m.enc_b2.rows, m.enc_b2.cols, 0.0f),
        emb(m.emb.rows, m.emb.cols, 0.0f),
        ctx_w(m.ctx_w.rows, m.ctx_w.cols, 0.0f),
        ctx_b(m.ctx_b.rows, m.ctx_b.cols, 0.0f),
        j_we(m.j_we.rows, m.j_we.cols, 0.0f),
        j_wd(m.j_wd.rows, m.j_wd.cols, 0.0f),
        j_b(m.j_b.rows, m.j_b.cols, 0.0f),
        out_w(m.out_w.rows, m.out_w.cols, 0.0f),
        out_b(m.out_b.rows, m.out_b.cols, 0.0f),
        eh_w(m.eh_w.rows, m.eh_w.cols, 0.0f),
        eh_b(m.eh_b.rows, m.eh_b.cols, 0.0f),
        dh_w(m.dh_w.rows, m.dh_w.cols, 0.0f),
        dh_b(m.dh_b.rows, m.dh_b.cols, 0.0f) {}

  std::vector<Mat<float>*> views() {
    return {&enc_w1, &enc_b1, &enc_w2, &enc_b2, &emb,   &ctx_w,
            &ctx_b,  &j_we,   &j_wd,   &j_b,    &out_w, &out_b,
            &eh_w,   &eh_b,   &dh_w,   &dh_b};
  }
  void zero() {
    for (Mat<float>* m : views()) std::fill(m->data.begin(), m->data.end(), 0.0f);
  }
};

// g_w += dy (x) x ; g_b += dy ; dx += W^T dy (dx may be null).
inline void affine_backward(const Mat<float>& w, const float* x,
                            const float* dy, Mat<float>& g_w, Mat<float>& g_b,
                            float* dx) {
  for (int32_t r = 0; r < w.rows; ++r) {
    float gr = dy[r];
    g_b.row(0)[r] += gr;
    float* gw = g_w.row(r);
    const float* wr = w.row(r);
    for (int32_t c = 0; c < w.cols; ++c) {
      gw[c] += gr * x[c];
      if (dx) dx[c] += gr * wr[c];
    }
  }
}

// Loss for one item plus parameter-gradient accumulation into `g`.
inline double item_loss_and_grads(const ToyTransducer& m,
                                  const DatasetItem& item,
                                  const TrainOptions& opt, ModelGrads& g) {
  const int32_t T = item.features.rows;
  const int32_t U = static_cast<int32_t>(item.targets.size());
  const int32_t V = m.cfg.vocab_size;
  const int32_t EN = m.cfg.enc_dim;
  const int32_t EM = m.cfg.emb_dim;
  const int32_t J = m.cfg.joiner_dim;
  const std::vector<int32_t>& tgt = item.targets;

  // Forward, keeping every intermediate the backward pass needs.
  Mat<float> h1(T, EN), enc(T, EN);
  for (int32_t t = 0; t < T; ++t) {
    affine(m.enc_w1, m.enc_b1, item.features.row(t), h1.row(t));
    tanh_inplace(h1.row(t), EN);
    affine(m.enc_w2, m.enc_b2, h1.row(t), enc.row(t));
    tanh_inplace(enc.row(t), EN);
  }
  std::vector<int32_t> contexts(U + 1);
  for (int32_t u = 0; u <= U; ++u)
    contexts[u] = context_of_prefix(tgt, u, V);
  Mat<float> cat(U + 1, 2 * EM), dec(U + 1, EM);
  for (int32_t u = 0; u <= U; ++u) {
    auto [a, b] = unpack_context(contexts[u], V);
    std::copy(m.emb.row(a), m.emb.row(a) + EM, cat.row(u));
    std::copy(m.emb.row(b), m.emb.row(b) + EM, cat.row(u) + EM);
    affine(m.ctx_w, m.ctx_b, cat.row(u), dec.row(u));
    tanh_inplace(dec.row(u), EM);
  }
  Mat<float> pe(T, J), pd(U + 1, J);
  for (int32_t t = 0; t < T; ++t) joiner_project_enc(m, enc.row(t), pe.row(t));
  for (int32_t u = 0; u <= U; ++u)
    joiner_project_dec(m, dec.row(u), pd.row(u));

  Mat<float> hj(T * (U + 1), J);
  Mat<double> lp(T * (U + 1), V);
  std::vector<float> logits(V);
  LogProbGrid grid_full;
  grid_full.T = T;
  grid_full.U = U;
  grid_full.blank_lp = Mat<double>(T, U + 1);
  grid_full.symbol_lp = Mat<double>(T, U);
  for (int32_t t = 0; t < T; ++t) {
    for (int32_t u = 0; u <= U; ++u) {
      int32_t r = t * (U + 1) + u;
      float* h = hj.row(r);
      for (int32_t i = 0; i < J; ++i)
        h[i] = std::tanh(pe.row(t)[i] + pd.row(u)[i] + m.j_b.row(0)[i]);
      affine(m.out_w, m.out_b, h, logits.data());
      log_softmax_row(logits.data(), V, lp.row(r));
      grid_full.blank_lp.at(t, u) = lp.row(r)[0];
      if (u < U) grid_full.symbol_lp.at(t, u) = lp.row(r)[tgt[u]];
    }
  }

  Mat<double> elp = enc_logprob_rows(m, enc);
  Mat<double> dlp = dec_logprob_rows(m, dec);
  // Head rows are log-normalized by construction whenever they are finite,
  // so a non-finite entry means exploded parameters, not a caller error:
  // report it as a non-finite loss rather than a validation failure.
  for (double v : elp.data)
    if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
  for (double v : dlp.data)
    if (!std::isfinite(v)) return std::numeric_limits<double>::quiet_NaN();
  LogProbGrid grid_triv =
      trivial_joiner_logprobs(elp, dlp, opt.lm_scale, tgt);

  CombinedLoss combined =
      combined_loss(grid_full, grid_triv, opt.variant, opt.lambda_simple);

  // Backward. d_enc / d_dec collect every path into the encoder and
  // decoder outputs; everything below them is shared.
  Mat<float> d_enc(T, EN, 0.0f), d_dec(U + 1, EM, 0.0f);
  Mat<float> d_pe(T, J, 0.0f), d_pd(U + 1, J, 0.0f);

  // Full joiner.
  std::vector<float> dz(V), da(J);
  for (int32_t t = 0; t < T; ++t) {
    for (int32_t u = 0; u <= U; ++u) {
      int32_t r = t * (U + 1) + u;
      double gb = combined.grad_full.d_blank.at(t, u);
      double gs = u < U ? combined.grad_full.d_symbol.at(t, u) : 0.0;
      if (gb == 0.0 && gs == 0.0) continue;
      double gsum = gb + gs;
      const double* lpr = lp.row(r);
      for (int32_t k = 0; k < V; ++k) {
        double glp = (k == 0 ? gb : 0.0) + (u < U && k == tgt[u] ? gs : 0.0);
        dz[k] = static_cast<float>(glp - std::exp(lpr[k]) * gsum);
      }
      const float* h = hj.row(r);
      std::fill(da.begin(), da.end(), 0.0f);
      affine_backward(m.out_w, h, dz.data(), g.out_w, g.out_b, da.data());
      for (int32_t i = 0; i < J; ++i) {
        float di = da[i] * (1.0f - h[i] * h[i]);
        g.j_b.row(0)[i] += di;
        d_pe.at(t, i) += di;
        d_pd.at(u, i) += di;
      }
    }
  }
  // The two joiner projections are bias-free; accumulate weight grads and
  // the pullback into enc/dec outputs in one pass each.
  for (int32_t t = 0; t < T; ++t) {
    const float* dyt = d_pe.row(t);
    for (int32_t i = 0; i < J; ++i) {
      float gi = dyt[i];
      float* gw = g.j_we.row(i);
      const float* wr = m.j_we.row(i);
      const float* er = enc.row(t);
      for (int32_t c = 0; c < EN; ++c) {
        gw[c] += gi * er[c];
        d_enc.at(t, c) += gi * wr[c];
      }
    }
  }
  for (int32_t u = 0; u <= U; ++u) {
    const float* dyu = d_pd.row(u);
    for (int32_t i = 0; i < J; ++i) {
      float gi = dyu[i];
      float* gw = g.j_wd.row(i);
      const float* wr = m.j_wd.row(i);
      const float* dr = dec.row(u);
      for (int32_t c = 0; c < EM; ++c) {
        gw[c] += gi * dr[c];
        d_dec.at(u, c) += gi * wr[c];
      }
    }
  }

  // Trivial joiner: z[t][u][k] = elp[t][k] + (1+lm_scale) dlp[u][k].
  if (opt.lambda_simple > 0.0) {
    const double c = 1.0 + opt.lm_scale;
    Mat<double> gelp(T, V, 0.0), gdlp(U + 1, V, 0.0);
    std::vector<double> mrow(V), pm(V);
    for (int32_t t = 0; t < T; ++t) {
      for (int32_t u = 0; u <= U; ++u) {
        double gb = combined.grad_trivial.d_blank.at(t, u);
        double gs = u < U ? combined.grad_trivial.d_symbol.at(t, u) : 0.0;
        if (gb == 0.0 && gs == 0.0) continue;
        double gsum = gb + gs;
        for (int32_t k = 0; k < V; ++k)
          mrow[k] = elp.at(t, k) + c * dlp.at(u, k);
        double lse = log_sum_exp(mrow.data(), V);
        for (int32_t k = 0; k < V; ++k) {
          pm[k] = std::exp(mrow[k] - lse);
          double glp =
              (k == 0 ? gb : 0.0) + (u < U && k == tgt[u] ? gs : 0.0);
          double dm = glp - pm[k] * gsum;
          gelp.at(t, k) += dm;
          gdlp.at(u, k) += c * dm;
        }
      }
    }
    // Through the two head log-softmaxes into head params and the shared
    // encoder/decoder outputs.
    std::vector<float> dzv(V);
    for (int32_t t = 0; t < T; ++t) {
      double gsum = 0.0;
      for (int32_t k = 0; k < V; ++k) gsum += gelp.at(t, k);
      for (int32_t k = 0; k < V; ++k)
        dzv[k] = static_cast<float>(gelp.at(t, k) -
                                    std::exp(elp.at(t, k)) * gsum);
      affine_backward(m.eh_w, enc.row(t), dzv.data(), g.eh_w, g.eh_b,
                      d_enc.row(t));
    }
    for (int32_t u = 0; u <= U; ++u) {
      double gsum = 0.0;
      for (int32_t k = 0; k < V; ++k) gsum += gdlp.at(u, k);
      for (int32_t k = 0; k < V; ++k)
        dzv[k] = static_cast<float>(gdlp.at(u, k) -
                                    std::exp(dlp.at(u, k)) * gsum);
      affine_backward(m.dh_w, dec.row(u), dzv.data(), g.dh_w, g.dh_b,
                      d_dec.row(u));
    }
  }

  // Decoder backward.
  std::vector<float> dsc(EM), dcat(2 * EM);
  for (int32_t u = 0; u <= U; ++u) {
    const float* d = dec.row(u);
    for (int32_t i = 0; i < EM; ++i)
      dsc[i] = d_dec.at(u, i) * (1.0f - d[i] * d[i]);
    std::fill(dcat.begin(), dcat.end(), 0.0f);
    affine_backward(m.ctx_w, cat.row(u), dsc.data(), g.ctx_w, g.ctx_b,
                    dcat.data());
    auto [a, b] = unpack_context(contexts[u], V);
    for (int32_t i = 0; i < EM; ++i) {
      g.emb.at(a, i) += dcat[i];
      g.emb.at(b, i) += dcat[EM + i];
    }
  }

  // Encoder backward.
  std::vector<float> ds2(EN), dh1(EN), ds1(EN);
  for (int32_t t = 0; t < T; ++t) {
    const float* et = enc.row(t);
    for (int32_t i = 0; i < EN; ++i)
      ds2[i] = d_enc.at(t, i) * (1.0f - et[i] * et[i]);
    std::fill(dh1.begin(), dh1.end(), 0.0f);
    affine_backward(m.enc_w2, h1.row(t), ds2.data(), g.enc_w2, g.enc_b2,
                    dh1.data());
    const float* h = h1.row(t);
    for (int32_t i = 0; i < EN; ++i) ds1[i] = dh1[i] * (1.0f - h[i] * h[i]);
    affine_backward(m.enc_w1, item.features.row(t), ds1.data(), g.enc_w1,
                    g.enc_b1, nullptr);
  }

  return combined.value;
}

}  // namespace detail

// Plain SGD over the dataset in order, single-threaded, mean-reduced over
// grad_accum items. Items infeasible under the variant (U > T) are skipped
// and counted. A non-finite loss aborts with NumericError.
inline ToyTransducer train(ToyTransducer model, const SyntheticDataset& ds,
                           const TrainOptions& opt,
                           TrainStats* stats = nullptr) {
  if (ds.items.empty()) throw ValidationError("train: dataset is empty");
  if (opt.lr < 0) throw ValidationError("train: lr must be >= 0");
  if (opt.epochs < 0) throw ValidationError("train: epochs must be >= 0");
  if (opt.grad_accum < 1)
    throw ValidationError("train: grad_accum must be >= 1");
  if (ds.feat_dim != model.cfg.feat_dim || ds.vocab_size != model.cfg.vocab_size)
    throw ValidationError("train: dataset dims do not match model config");

  TrainStats local;
  TrainStats& st = stats ? *stats : local;
  detail::ModelGrads grads(model);
  auto params = model.param_views();

  for (int32_t epoch = 0; epoch < opt.epochs; ++epoch) {
    double loss_sum = 0.0;
    int64_t loss_count = 0;
    grads.zero();
    int32_t window = 0;
    auto apply = [&]() {
      if (window == 0) return;
      float scale = static_cast<float>(opt.lr / window);
      auto gv = grads.views();
      for (size_t i = 0; i < params.size(); ++i) {
        Mat<float>* p = params[i].second;
        Mat<float>* gm = gv[i];
        for (size_t k = 0; k < p->data.size(); ++k)
          p->data[k] -= scale * gm->data[k];
      }
      grads.zero();
      window = 0;
      st.updates++;
    };
    for (const DatasetItem& item : ds.items) {
      bool feasible = opt.variant == Variant::kRegular ||
                      static_cast<int32_t>(item.targets.size()) <=
                          item.features.rows;
      if (!feasible) {
        st.skipped_items++;
        continue;
      }
      double loss = detail::item_loss_and_grads(model, item, opt, grads);
      if (!std::isfinite(loss))
        throw NumericError("training diverged: non-finite loss at epoch " +
                           std::to_string(epoch));
      loss_sum += loss;
      loss_count++;
      if (++window == opt.grad_accum) apply();
    }
    apply();
    st.epoch_mean_loss.push_back(loss_count ? loss_sum / loss_count : 0.0);
  }
  return model;
}

}  // namespace rnnt

#endif  // RNNT_TRAIN_HPP_
