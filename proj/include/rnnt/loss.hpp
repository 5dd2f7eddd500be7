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

#ifndef RNNT_LOSS_HPP_
#define RNNT_LOSS_HPP_

#include <cmath>
#include <cstdint>
#include <vector>

#include "rnnt/common.hpp"

namespace rnnt {

// Per-utterance transducer log-probabilities on the (frame, context) grid.
// blank_lp[t][u] = log P(blank | context u, frame t), shape T x (U+1).
// symbol_lp[t][u] = log P(target u+1 | context u, frame t), shape T x U.
struct LogProbGrid {
  int32_t T = 0;
  int32_t U = 0;
  Mat<double> blank_lp;
  Mat<double> symbol_lp;
};

enum class Variant { kRegular, kModified, kConstrained };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::kRegular: return "regular";
    case Variant::kModified: return "modified";
    case Variant::kConstrained: return "constrained";
  }
  return "?";
}

struct LossResult {
  double loglik = kNegInf;
  Mat<double> alpha;  // T x (U+1) regular, (T+1) x (U+1) modified/constrained
  Variant variant = Variant::kRegular;
};

struct GridGradient {
  Mat<double> d_blank;   // T x (U+1)
  Mat<double> d_symbol;  // T x U
};

namespace detail {

inline void check_grid(const LogProbGrid& g) {
  if (g.T < 1) throw ValidationError("grid must have T >= 1 frames");
  if (g.U < 0) throw ValidationError("grid must have U >= 0");
  if (g.blank_lp.rows != g.T || g.blank_lp.cols != g.U + 1)
    throw ValidationError("blank_lp shape must be T x (U+1)");
  if (g.symbol_lp.rows != g.T || g.symbol_lp.cols != g.U)
    throw ValidationError("symbol_lp shape must be T x U");
}

}  // namespace detail

// Regular recursion: a blank consumes a frame, a symbol stays on it.
// alpha(t,u) = logadd(alpha(t-1,u) + blank(t-1,u),
//                     alpha(t,u-1) + symbol(t,u-1));
// loglik = alpha(T-1,U) + blank(T-1,U)  (trailing blank leaves the grid).
inline LossResult forward_regular(const LogProbGrid& g) {
  detail::check_grid(g);
  const int32_t T = g.T, U = g.U;
  LossResult res;
  res.variant = Variant::kRegular;
  res.alpha = Mat<double>(T, U + 1, kNegInf);
  res.alpha.at(0, 0) = 0.0;
  for (int32_t t = 0; t < T; ++t) {
    for (int32_t u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) continue;
      double via_blank =
          t > 0 ? res.alpha.at(t - 1, u) + g.blank_lp.at(t - 1, u) : kNegInf;
      double via_symbol =
          u > 0 ? res.alpha.at(t, u - 1) + g.symbol_lp.at(t, u - 1) : kNegInf;
      res.alpha.at(t, u) = log_add(via_blank, via_symbol);
    }
  }
  res.loglik = res.alpha.at(T - 1, U) + g.blank_lp.at(T - 1, U);
  return res;
}

// Modified recursion: every transition consumes a frame; symbols move
// diagonally. alpha(t,u) = logadd(alpha(t-1,u) + blank(t-1,u),
//                                 alpha(t-1,u-1) + symbol(t-1,u-1));
// loglik = alpha(T,U); U > T has no path and yields -inf.
inline LossResult forward_modified(const LogProbGrid& g) {
  detail::check_grid(g);
  const int32_t T = g.T, U = g.U;
  LossResult res;
  res.variant = Variant::kModified;
  res.alpha = Mat<double>(T + 1, U + 1, kNegInf);
  res.alpha.at(0, 0) = 0.0;
  for (int32_t t = 1; t <= T; ++t) {
    for (int32_t u = 0; u <= U; ++u) {
      double via_blank = res.alpha.at(t - 1, u) + g.blank_lp.at(t - 1, u);
      double via_symbol =
          u > 0 ? res.alpha.at(t - 1, u - 1) + g.symbol_lp.at(t - 1, u - 1)
                : kNegInf;
      res.alpha.at(t, u) = log_add(via_blank, via_symbol);
    }
  }
  res.loglik = res.alpha.at(T, U);
  return res;
}

// Constrained recursion: like modified, but a symbol transition also pays
// the blank log-prob at the advanced context on the same frame:
// alpha(t,u) = logadd(alpha(t-1,u) + blank(t-1,u),
//                     alpha(t-1,u-1) + symbol(t-1,u-1) + blank(t-1,u)).
inline LossResult forward_constrained(const LogProbGrid& g) {
  detail::check_grid(g);
  const int32_t T = g.T, U = g.U;
  LossResult res;
  res.variant = Variant::kConstrained;
  res.alpha = Mat<double>(T + 1, U + 1, kNegInf);
  res.alpha.at(0, 0) = 0.0;
  for (int32_t t = 1; t <= T; ++t) {
    for (int32_t u = 0; u <= U; ++u) {
      double via_blank = res.alpha.at(t - 1, u) + g.blank_lp.at(t - 1, u);
      double via_symbol =
          u > 0 ? res.alpha.at(t - 1, u - 1) + g.symbol_lp.at(t - 1, u - 1) +
                      g.blank_lp.at(t - 1, u)
                : kNegInf;
      res.alpha.at(t, u) = log_add(via_blank, via_symbol);
    }
  }
  res.loglik = res.alpha.at(T, U);
  return res;
}

inline LossResult forward(const LogProbGrid& g, Variant v) {
  switch (v) {
    case Variant::kRegular: return forward_regular(g);
    case Variant::kModified: return forward_modified(g);
    case Variant::kConstrained: return forward_constrained(g);
  }
  throw ValidationError("unknown variant");
}

// Exhaustive path enumeration, usable only at toy sizes. Regular paths run
// (0,0) -> (T-1,U) monotonically plus a trailing blank; modified and
// constrained paths are the size-U subsets of frames that emit a symbol.
inline double brute_force_loglik(const LogProbGrid& g, Variant v) {
  detail::check_grid(g);
  const int32_t T = g.T, U = g.U;
  if (T > 8 || U > 6)
    throw ValidationError("brute_force_loglik: T <= 8 and U <= 6 required");

  if (v == Variant::kRegular) {
    double total = kNegInf;
    // DFS over lattice moves: blank advances t, symbol advances u.
    auto dfs = [&](auto&& self, int32_t t, int32_t u, double w) -> void {
      if (t == T - 1 && u == U) {
        total = log_add(total, w + g.blank_lp.at(T - 1, U));
        return;
      }
      if (t < T - 1) self(self, t + 1, u, w + g.blank_lp.at(t, u));
      if (u < U) self(self, t, u + 1, w + g.symbol_lp.at(t, u));
    };
    dfs(dfs, 0, 0, 0.0);
    return total;
  }

  if (U > T) return kNegInf;
  double total = kNegInf;
  std::vector<int32_t> emit;  // frames carrying a symbol, strictly increasing
  auto choose = [&](auto&& self, int32_t next_frame) -> void {
    if (static_cast<int32_t>(emit.size()) == U) {
      for (size_t i = 1; i < emit.size(); ++i)
        if (emit[i] <= emit[i - 1])
          throw std::logic_error("oracle path frames not increasing");
      double w = 0.0;
      int32_t u = 0;
      size_t next_emit = 0;
      for (int32_t t = 0; t < T; ++t) {
        if (next_emit < emit.size() && emit[next_emit] == t) {
          w += g.symbol_lp.at(t, u);
          if (v == Variant::kConstrained) w += g.blank_lp.at(t, u + 1);
          ++u;
          ++next_emit;
        } else {
          w += g.blank_lp.at(t, u);
        }
      }
      total = log_add(total, w);
      return;
    }
    int32_t remaining = U - static_cast<int32_t>(emit.size());
    for (int32_t t = next_frame; t + remaining <= T; ++t) {
      emit.push_back(t);
      self(self, t + 1);
      emit.pop_back();
    }
  };
  choose(choose, 0);
  return total;
}

// Exact dloglik/dentry via the backward (beta) recursion; entries are edge
// occupancies d = exp(alpha + edge + beta - loglik). In the constrained
// variant a symbol edge also occupies the blank entry at the advanced
// context on the same frame.
inline GridGradient grad(const LogProbGrid& g, Variant v) {
  LossResult fwd = forward(g, v);
  if (!std::isfinite(fwd.loglik))
    throw NumericError("gradient undefined: loglik is not finite");
  const int32_t T = g.T, U = g.U;
  const double ll = fwd.loglik;
  GridGradient out;
  out.d_blank = Mat<double>(T, U + 1, 0.0);
  out.d_symbol = Mat<double>(T, U, 0.0);

  if (v == Variant::kRegular) {
    Mat<double> beta(T, U + 1, kNegInf);
    beta.at(T - 1, U) = g.blank_lp.at(T - 1, U);
    for (int32_t t = T - 1; t >= 0; --t) {
      for (int32_t u = U; u >= 0; --u) {
        if (t == T - 1 && u == U) continue;
        double via_blank =
            t + 1 < T ? g.blank_lp.at(t, u) + beta.at(t + 1, u) : kNegInf;
        double via_symbol =
            u < U ? g.symbol_lp.at(t, u) + beta.at(t, u + 1) : kNegInf;
        beta.at(t, u) = log_add(via_blank, via_symbol);
      }
    }
    for (int32_t t = 0; t < T; ++t) {
      for (int32_t u = 0; u <= U; ++u) {
        if (t + 1 < T)
          out.d_blank.at(t, u) += std::exp(fwd.alpha.at(t, u) +
                                           g.blank_lp.at(t, u) +
                                           beta.at(t + 1, u) - ll);
        if (u < U)
          out.d_symbol.at(t, u) += std::exp(fwd.alpha.at(t, u) +
                                            g.symbol_lp.at(t, u) +
                                            beta.at(t, u + 1) - ll);
      }
    }
    // Terminal blank edge: occupancy is exactly 1 when loglik is finite.
    out.d_blank.at(T - 1, U) +=
        std::exp(fwd.alpha.at(T - 1, U) + g.blank_lp.at(T - 1, U) - ll);
    return out;
  }

  Mat<double> beta(T + 1, U + 1, kNegInf);
  beta.at(T, U) = 0.0;
  for (int32_t t = T - 1; t >= 0; --t) {
    for (int32_t u = U; u >= 0; --u) {
      double via_blank = g.blank_lp.at(t, u) + beta.at(t + 1, u);
      double via_symbol = kNegInf;
      if (u < U) {
        via_symbol = g.symbol_lp.at(t, u) + beta.at(t + 1, u + 1);
        if (v == Variant::kConstrained) via_symbol += g.blank_lp.at(t, u + 1);
      }
      beta.at(t, u) = log_add(via_blank, via_symbol);
    }
  }
  for (int32_t t = 0; t < T; ++t) {
    for (int32_t u = 0; u <= U; ++u) {
      out.d_blank.at(t, u) += std::exp(fwd.alpha.at(t, u) +
                                       g.blank_lp.at(t, u) +
                                       beta.at(t + 1, u) - ll);
      if (u < U) {
        double edge = fwd.alpha.at(t, u) + g.symbol_lp.at(t, u) +
                      beta.at(t + 1, u + 1);
        if (v == Variant::kConstrained) edge += g.blank_lp.at(t, u + 1);
        double occ = std::exp(edge - ll);
        out.d_symbol.at(t, u) += occ;
        if (v == Variant::kConstrained) out.d_blank.at(t, u + 1) += occ;
      }
    }
  }
  return out;
}

// Combines per-frame encoder log-probs with per-context decoder log-probs
// without a learned joiner: z[t][u][k] = enc[t][k] + (1+lm_scale)*dec[u][k],
// re-normalized over k, then reduced to a LogProbGrid for `targets`.
inline LogProbGrid trivial_joiner_logprobs(const Mat<double>& enc_lp,
                                           const Mat<double>& dec_lp,
                                           double lm_scale,
                                           const std::vector<int32_t>& targets) {
  if (lm_scale < 0.0)
    throw ValidationError("lm_scale must be >= 0");
  if (enc_lp.cols != dec_lp.cols)
    throw ValidationError("enc_lp and dec_lp must share vocab size");
  const int32_t T = enc_lp.rows;
  const int32_t V = enc_lp.cols;
  const int32_t U = static_cast<int32_t>(targets.size());
  if (T < 1) throw ValidationError("enc_lp must have at least one row");
  if (dec_lp.rows != U + 1)
    throw ValidationError("dec_lp must have U+1 rows");
  for (int32_t t = 0; t < T; ++t)
    if (std::abs(log_sum_exp(enc_lp.row(t), V)) > 1e-6)
      throw ValidationError("enc_lp row " + std::to_string(t) +
                            " is not log-normalized");
  for (int32_t u = 0; u <= U; ++u)
    if (std::abs(log_sum_exp(dec_lp.row(u), V)) > 1e-6)
      throw ValidationError("dec_lp row " + std::to_string(u) +
                            " is not log-normalized");
  for (int32_t tok : targets)
    if (tok <= 0 || tok >= V)
      throw ValidationError("target token out of vocabulary range");

  LogProbGrid grid;
  grid.T = T;
  grid.U = U;
  grid.blank_lp = Mat<double>(T, U + 1, 0.0);
  grid.symbol_lp = Mat<double>(T, U, 0.0);
  std::vector<double> z(V);
  const double dec_w = 1.0 + lm_scale;
  for (int32_t t = 0; t < T; ++t) {
    const double* e = enc_lp.row(t);
    for (int32_t u = 0; u <= U; ++u) {
      const double* d = dec_lp.row(u);
      for (int32_t k = 0; k < V; ++k) z[k] = e[k] + dec_w * d[k];
      double lse = log_sum_exp(z.data(), V);
      grid.blank_lp.at(t, u) = z[0] - lse;
      if (u < U) grid.symbol_lp.at(t, u) = z[targets[u]] - lse;
    }
  }
  return grid;
}

// Loss of the full joiner regularized by the trivial joiner:
// value = -loglik(full) + lambda_simple * -loglik(trivial).
// Gradients are w.r.t. the grid entries (not model parameters).
struct CombinedLoss {
  double value = 0.0;
  double loglik_full = kNegInf;
  double loglik_trivial = kNegInf;
  GridGradient grad_full;
  GridGradient grad_trivial;
};

inline CombinedLoss combined_loss(const LogProbGrid& full_grid,
                                  const LogProbGrid& trivial_grid,
                                  Variant v, double lambda_simple) {
  if (full_grid.T != trivial_grid.T || full_grid.U != trivial_grid.U)
    throw ValidationError("combined_loss: grids must share (T, U)");
  if (lambda_simple < 0.0)
    throw ValidationError("lambda_simple must be >= 0");
  CombinedLoss out;
  out.loglik_full = forward(full_grid, v).loglik;
  out.loglik_trivial = forward(trivial_grid, v).loglik;
  out.value = -out.loglik_full + lambda_simple * -out.loglik_trivial;

  GridGradient gf = grad(full_grid, v);
  for (double& x : gf.d_blank.data) x = -x;
  for (double& x : gf.d_symbol.data) x = -x;
  out.grad_full = std::move(gf);

  const int32_t T = full_grid.T, U = full_grid.U;
  if (lambda_simple == 0.0) {
    out.grad_trivial.d_blank = Mat<double>(T, U + 1, 0.0);
    out.grad_trivial.d_symbol = Mat<double>(T, U, 0.0);
  } else {
    GridGradient gt = grad(trivial_grid, v);
    for (double& x : gt.d_blank.data) x = -lambda_simple * x;
    for (double& x : gt.d_symbol.data) x = -lambda_simple * x;
    out.grad_trivial = std::move(gt);
  }
  return out;
}

}  // namespace rnnt

#endif  // RNNT_LOSS_HPP_
