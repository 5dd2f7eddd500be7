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

#ifndef RNNT_DATASET_HPP_
#define RNNT_DATASET_HPP_

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rnnt/common.hpp"

namespace rnnt {

struct DatasetItem {
  Mat<float> features;           // T x feat_dim
  std::vector<int32_t> targets;  // blank-free
};

struct SyntheticDataset {
  int32_t vocab_size = 0;
  int32_t feat_dim = 0;
  std::vector<DatasetItem> items;
};

// Frames of silence (token-0 template) padding each utterance.
inline constexpr int32_t kLeadInFrames = 2;
inline constexpr int32_t kLeadOutFrames = 2;

// Each utterance: a uniform-length random token sequence over [1, V-1]
// with no adjacent repeats, rendered as frames_per_token copies of the
// token's one-hot template row plus gaussian noise, padded by token-0
// lead-in/lead-out frames. feat_dim equals vocab_size so templates are
// plain one-hots.
inline SyntheticDataset synth_dataset(uint64_t seed, int32_t num_items,
                                      int32_t vocab_size, int32_t min_len,
                                      int32_t max_len,
                                      int32_t frames_per_token = 3,
                                      double noise_std = 0.1) {
  if (vocab_size < 2) throw ValidationError("vocab_size must be >= 2");
  if (min_len < 0 || min_len > max_len)
    throw ValidationError("need 0 <= min_len <= max_len");
  if (num_items < 0) throw ValidationError("num_items must be >= 0");
  if (frames_per_token < 1)
    throw ValidationError("frames_per_token must be >= 1");
  if (noise_std < 0) throw ValidationError("noise_std must be >= 0");

  SyntheticDataset ds;
  ds.vocab_size = vocab_size;
  ds.feat_dim = vocab_size;
  DetRng rng(seed);
  for (int32_t i = 0; i < num_items; ++i) {
    DatasetItem item;
    int32_t len = min_len + static_cast<int32_t>(rng.below(
                                static_cast<uint64_t>(max_len - min_len + 1)));
    item.targets.resize(len);
    for (int32_t u = 0; u < len; ++u) {
      // No adjacent repeats (unless V=2 leaves no choice): the boundary
      // between two identical tokens is invisible in the features, so a
      // frame-local encoder cannot transcribe such sequences.
      if (u == 0 || vocab_size == 2) {
        item.targets[u] =
            1 + static_cast<int32_t>(rng.below(
                    static_cast<uint64_t>(vocab_size - 1)));
      } else {
        int32_t tok =
            1 + static_cast<int32_t>(rng.below(
                    static_cast<uint64_t>(vocab_size - 2)));
        if (tok >= item.targets[u - 1]) ++tok;
        item.targets[u] = tok;
      }
    }
    int32_t T = kLeadInFrames + frames_per_token * len + kLeadOutFrames;
    item.features = Mat<float>(T, vocab_size, 0.0f);
    std::vector<int32_t> frame_token(T, 0);
    for (int32_t u = 0; u < len; ++u)
      for (int32_t k = 0; k < frames_per_token; ++k)
        frame_token[kLeadInFrames + u * frames_per_token + k] =
            item.targets[u];
    for (int32_t t = 0; t < T; ++t) {
      float* row = item.features.row(t);
      row[frame_token[t]] = 1.0f;
      if (noise_std > 0)
        for (int32_t d = 0; d < vocab_size; ++d)
          row[d] += static_cast<float>(noise_std * rng.gaussian());
    }
    ds.items.push_back(std::move(item));
  }
  return ds;
}

// On-disk layout: <dir>/manifest.json plus one raw blob per utterance
// (header: u32 T, u32 feat_dim; then T*feat_dim little-endian f32).
inline void save_dataset(const SyntheticDataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  nlohmann::json manifest;
  manifest["vocab_size"] = ds.vocab_size;
  manifest["feat_dim"] = ds.feat_dim;
  manifest["items"] = nlohmann::json::array();
  for (size_t i = 0; i < ds.items.size(); ++i) {
    const DatasetItem& item = ds.items[i];
    std::string name = "utt_" + std::to_string(i) + ".bin";
    manifest["items"].push_back(
        {{"file", name}, {"targets", item.targets}});
    std::ofstream out(fs::path(dir) / name, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + name);
    uint32_t t32 = static_cast<uint32_t>(item.features.rows);
    uint32_t d32 = static_cast<uint32_t>(item.features.cols);
    out.write(reinterpret_cast<const char*>(&t32), 4);
    out.write(reinterpret_cast<const char*>(&d32), 4);
    out.write(reinterpret_cast<const char*>(item.features.data.data()),
              static_cast<std::streamsize>(item.features.data.size() * 4));
    if (!out) throw ValidationError("short write to " + name);
  }
  std::ofstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw ValidationError("cannot write manifest.json");
  mf << manifest.dump(2) << "\n";
}

inline SyntheticDataset load_dataset(const std::string& dir) {
  namespace fs = std::filesystem;
  std::ifstream mf(fs::path(dir) / "manifest.json");
  if (!mf) throw ValidationError("cannot open " + dir + "/manifest.json");
  nlohmann::json manifest;
  try {
    mf >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest.json: ") + e.what());
  }
  SyntheticDataset ds;
  try {
    ds.vocab_size = manifest.at("vocab_size").get<int32_t>();
    ds.feat_dim = manifest.at("feat_dim").get<int32_t>();
    for (const auto& entry : manifest.at("items")) {
      DatasetItem item;
      item.targets = entry.at("targets").get<std::vector<int32_t>>();
      std::string name = entry.at("file").get<std::string>();
      std::ifstream in(fs::path(dir) / name, std::ios::binary);
      if (!in) throw ValidationError("cannot open " + name);
      uint32_t t32 = 0, d32 = 0;
      in.read(reinterpret_cast<char*>(&t32), 4);
      in.read(reinterpret_cast<char*>(&d32), 4);
      if (!in || d32 != static_cast<uint32_t>(ds.feat_dim))
        throw ValidationError("corrupt feature blob " + name);
      item.features = Mat<float>(static_cast<int32_t>(t32),
                                 static_cast<int32_t>(d32));
      in.read(reinterpret_cast<char*>(item.features.data.data()),
              static_cast<std::streamsize>(item.features.data.size() * 4));
      if (!in) throw ValidationError("truncated feature blob " + name);
      ds.items.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest.json: ") + e.what());
  }
  return ds;
}

}  // namespace rnnt

#endif  // RNNT_DATASET_HPP_
