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

#ifndef RNNT_COMMON_HPP_
#define RNNT_COMMON_HPP_

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace rnnt {

// Scores everywhere are natural-log probabilities, additive along paths.
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Thrown on malformed text inputs (FSA text, ARPA). Message carries the line.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown on contract violations in data: bad dimensions, invalid ids,
// structurally broken FSAs, unnormalized rows, unknown symbols.
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a numeric computation cannot proceed (training divergence,
// gradient of a -inf log-likelihood).
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double mx = a > b ? a : b;
  double mn = a > b ? b : a;
  return mx + std::log1p(std::exp(mn - mx));
}

// Row-major dense matrix of a numeric type; the only container the model
// and grid code need.
template <typename T>
struct Mat {
  int32_t rows = 0;
  int32_t cols = 0;
  std::vector<T> data;

  Mat() = default;
  Mat(int32_t r, int32_t c, T fill = T{})
      : rows(r), cols(c), data(static_cast<size_t>(r) * c, fill) {}

  T* row(int32_t r) { return data.data() + static_cast<size_t>(r) * cols; }
  const T* row(int32_t r) const {
    return data.data() + static_cast<size_t>(r) * cols;
  }
  T& at(int32_t r, int32_t c) {
    return data[static_cast<size_t>(r) * cols + c];
  }
  const T& at(int32_t r, int32_t c) const {
    return data[static_cast<size_t>(r) * cols + c];
  }
  bool operator==(const Mat& o) const {
    return rows == o.rows && cols == o.cols && data == o.data;
  }
};

// Deterministic RNG used everywhere randomness is part of a contract.
// std::uniform_real_distribution / std::normal_distribution are
// implementation-defined, so uniforms are derived from raw mt19937_64 bits
// and gaussians via Box-Muller; results are identical across platforms.
class DetRng {
 public:
  explicit DetRng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Uniform integer in [0, n).
  uint64_t below(uint64_t n) {
    // Modulo bias is irrelevant at the ranges used here (n << 2^64).
    return gen_() % n;
  }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    double u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

inline double log_sum_exp(const double* x, int32_t n) {
  double mx = kNegInf;
  for (int32_t i = 0; i < n; ++i) mx = std::max(mx, x[i]);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (int32_t i = 0; i < n; ++i) s += std::exp(x[i] - mx);
  return mx + std::log(s);
}

}  // namespace rnnt

#endif  // RNNT_COMMON_HPP_
