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

#ifndef RNNT_METRICS_HPP_
#define RNNT_METRICS_HPP_

#include <algorithm>
#include <cstdint>
#include <vector>

namespace rnnt {

// Levenshtein distance (unit costs) between token sequences.
inline int64_t edit_distance(const std::vector<int32_t>& ref,
                             const std::vector<int32_t>& hyp) {
  const size_t R = ref.size(), H = hyp.size();
  std::vector<int64_t> prev(H + 1), cur(H + 1);
  for (size_t j = 0; j <= H; ++j) prev[j] = static_cast<int64_t>(j);
  for (size_t i = 1; i <= R; ++i) {
    cur[0] = static_cast<int64_t>(i);
    for (size_t j = 1; j <= H; ++j) {
      int64_t sub = prev[j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    prev.swap(cur);
  }
  return prev[H];
}

// 1 - (total edits / total reference tokens), floored at 0.
inline double token_accuracy(
    const std::vector<std::vector<int32_t>>& refs,
    const std::vector<std::vector<int32_t>>& hyps) {
  int64_t edits = 0, tokens = 0;
  for (size_t i = 0; i < refs.size() && i < hyps.size(); ++i) {
    edits += edit_distance(refs[i], hyps[i]);
    tokens += static_cast<int64_t>(refs[i].size());
  }
  if (tokens == 0) return edits == 0 ? 1.0 : 0.0;
  double acc = 1.0 - static_cast<double>(edits) / static_cast<double>(tokens);
  return std::max(0.0, acc);
}

}  // namespace rnnt

#endif  // RNNT_METRICS_HPP_
