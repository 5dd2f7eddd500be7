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

#ifndef RNNT_CHECKPOINT_HPP_
#define RNNT_CHECKPOINT_HPP_

#include <cstdint>
#include <fstream>
#include <string>

#include "rnnt/model.hpp"

namespace rnnt {

// "RNT1" little-endian.
inline constexpr uint32_t kCheckpointMagic = 0x31544e52u;
inline constexpr uint32_t kCheckpointVersion = 1;

namespace detail {

inline void write_u32(std::ofstream& out, uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), 4);
}
inline void write_u64(std::ofstream& out, uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), 8);
}
inline uint32_t read_u32(std::ifstream& in) {
  uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  if (!in) throw ValidationError("checkpoint: truncated file");
  return v;
}
inline uint64_t read_u64(std::ifstream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  if (!in) throw ValidationError("checkpoint: truncated file");
  return v;
}

}  // namespace detail

// Layout: magic, version, config (6 x i32 + u64 seed), tensor count, then
// per tensor: name length, name bytes, rows, cols, row-major f32 data.
// All integers and floats little-endian.
inline void save_checkpoint(const ToyTransducer& model,
                            const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write checkpoint " + path);
  detail::write_u32(out, kCheckpointMagic);
  detail::write_u32(out, kCheckpointVersion);
  const ModelConfig& c = model.cfg;
  detail::write_u32(out, static_cast<uint32_t>(c.vocab_size));
  detail::write_u32(out, static_cast<uint32_t>(c.feat_dim));
  detail::write_u32(out, static_cast<uint32_t>(c.enc_dim));
  detail::write_u32(out, static_cast<uint32_t>(c.emb_dim));
  detail::write_u32(out, static_cast<uint32_t>(c.joiner_dim));
  detail::write_u32(out, static_cast<uint32_t>(c.context_size));
  detail::write_u64(out, c.seed);
  auto views = model.param_views();
  detail::write_u32(out, static_cast<uint32_t>(views.size()));
  for (const auto& [name, mat] : views) {
    detail::write_u32(out, static_cast<uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    detail::write_u32(out, static_cast<uint32_t>(mat->rows));
    detail::write_u32(out, static_cast<uint32_t>(mat->cols));
    out.write(reinterpret_cast<const char*>(mat->data.data()),
              static_cast<std::streamsize>(mat->data.size() * 4));
  }
  if (!out) throw ValidationError("short write to checkpoint " + path);
}

inline ToyTransducer load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open checkpoint " + path);
  if (detail::read_u32(in) != kCheckpointMagic)
    throw ValidationError("checkpoint: bad magic (not a checkpoint file)");
  uint32_t version = detail::read_u32(in);
  if (version != kCheckpointVersion)
    throw ValidationError("checkpoint: unsupported version " +
                          std::to_string(version));
  ModelConfig cfg;
  cfg.vocab_size = static_cast<int32_t>(detail::read_u32(in));
  cfg.feat_dim = static_cast<int32_t>(detail::read_u32(in));
  cfg.enc_dim = static_cast<int32_t>(detail::read_u32(in));
  cfg.emb_dim = static_cast<int32_t>(detail::read_u32(in));
  cfg.joiner_dim = static_cast<int32_t>(detail::read_u32(in));
  cfg.context_size = static_cast<int32_t>(detail::read_u32(in));
  cfg.seed = detail::read_u64(in);
  check_config(cfg);

  ToyTransducer model = init_model(cfg);
  auto views = model.param_views();
  uint32_t count = detail::read_u32(in);
  if (count != views.size())
    throw ValidationError("checkpoint: unexpected tensor count");
  for (auto& [name, mat] : views) {
    uint32_t name_len = detail::read_u32(in);
    std::string got(name_len, '\0');
    in.read(got.data(), name_len);
    if (!in || got != name)
      throw ValidationError("checkpoint: expected tensor '" + name +
                            "', found '" + got + "'");
    uint32_t rows = detail::read_u32(in);
    uint32_t cols = detail::read_u32(in);
    if (rows != static_cast<uint32_t>(mat->rows) ||
        cols != static_cast<uint32_t>(mat->cols))
      throw ValidationError("checkpoint: shape mismatch for tensor '" + name +
                            "'");
    in.read(reinterpret_cast<char*>(mat->data.data()),
            static_cast<std::streamsize>(mat->data.size() * 4));
    if (!in) throw ValidationError("checkpoint: truncated file");
  }
  return model;
}

}  // namespace rnnt

#endif  // RNNT_CHECKPOINT_HPP_
