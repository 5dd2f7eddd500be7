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

#ifndef RNNT_RAGGED_HPP_
#define RNNT_RAGGED_HPP_

#include <cstdint>
#include <vector>

#include "rnnt/common.hpp"

namespace rnnt {

// Two-level index structure mapping rows (streams) to a flat element list.
// row_splits[r] .. row_splits[r+1] is the element range of row r;
// row_ids[k] is the owning row of element k.
struct RaggedShape {
  std::vector<int32_t> row_splits;  // size num_rows + 1, starts at 0
  std::vector<int32_t> row_ids;     // size total elements

  int32_t num_rows() const {
    return static_cast<int32_t>(row_splits.size()) - 1;
  }
  int32_t num_elements() const {
    return static_cast<int32_t>(row_ids.size());
  }
  int32_t row_size(int32_t r) const {
    return row_splits[r + 1] - row_splits[r];
  }

  // Checks the row_splits/row_ids consistency invariants.
  bool valid() const {
    if (row_splits.empty() || row_splits.front() != 0) return false;
    for (size_t r = 1; r < row_splits.size(); ++r)
      if (row_splits[r] < row_splits[r - 1]) return false;
    if (row_splits.back() != static_cast<int32_t>(row_ids.size()))
      return false;
    for (int32_t r = 0; r < num_rows(); ++r)
      for (int32_t k = row_splits[r]; k < row_splits[r + 1]; ++k)
        if (row_ids[k] != r) return false;
    return true;
  }
};

inline RaggedShape build_ragged(const std::vector<int32_t>& counts) {
  RaggedShape shape;
  shape.row_splits.resize(counts.size() + 1);
  shape.row_splits[0] = 0;
  for (size_t r = 0; r < counts.size(); ++r)
    shape.row_splits[r + 1] = shape.row_splits[r] + counts[r];
  shape.row_ids.reserve(shape.row_splits.back());
  for (size_t r = 0; r < counts.size(); ++r)
    for (int32_t k = 0; k < counts[r]; ++k)
      shape.row_ids.push_back(static_cast<int32_t>(r));
  return shape;
}

}  // namespace rnnt

#endif  // RNNT_RAGGED_HPP_
