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

#ifndef RNNT_RNNT_HPP_
#define RNNT_RNNT_HPP_

#include "rnnt/arpa.hpp"
#include "rnnt/checkpoint.hpp"
#include "rnnt/common.hpp"
#include "rnnt/dataset.hpp"
#include "rnnt/fsa.hpp"
#include "rnnt/fsa_search.hpp"
#include "rnnt/loss.hpp"
#include "rnnt/metrics.hpp"
#include "rnnt/model.hpp"
#include "rnnt/ragged.hpp"
#include "rnnt/search.hpp"
#include "rnnt/train.hpp"

#endif  // RNNT_RNNT_HPP_
