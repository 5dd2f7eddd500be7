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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "oracles.hpp"
#include "rnnt/rnnt.hpp"

using namespace rnnt;

namespace {

bool params_equal(const ToyTransducer& a, const ToyTransducer& b) {
  auto va = a.param_views();
  auto vb = b.param_views();
  if (va.size() != vb.size()) return false;
  for (size_t i = 0; i < va.size(); ++i)
    if (va[i].second->data != vb[i].second->data) return false;
  return true;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

}  // namespace

TEST_CASE("init_model is deterministic and seed-sensitive", "[model]") {
  ModelConfig cfg;
  cfg.seed = 7;
  ToyTransducer a = init_model(cfg);
  ToyTransducer b = init_model(cfg);
  CHECK(params_equal(a, b));

  cfg.seed = 8;
  ToyTransducer c = init_model(cfg);
  CHECK_FALSE(params_equal(a, c));

  ModelConfig bad;
  bad.vocab_size = 1;
  CHECK_THROWS_AS(init_model(bad), ValidationError);
}

TEST_CASE("forward paths reject models that skipped init_model", "[model]") {
  // ToyTransducer is an aggregate; unsized parameter matrices must surface
  // as a validation error at the forward entry points, not memory errors.
  ToyTransducer empty;
  empty.cfg = ModelConfig{};
  Mat<float> feats(2, empty.cfg.feat_dim);
  CHECK_THROWS_AS(encoder_forward(empty, feats), ValidationError);
  CHECK_THROWS_AS(decoder_forward(empty, {0}), ValidationError);
  CHECK_THROWS_AS(beam_search(empty, feats, SearchParams{}), ValidationError);

  ToyTransducer skewed = init_model(ModelConfig{});
  skewed.emb = Mat<float>(skewed.cfg.vocab_size - 1, skewed.cfg.emb_dim);
  CHECK_THROWS_AS(decoder_forward(skewed, {0}), ValidationError);
}

TEST_CASE("encoder on zero features yields identical bias-driven rows",
          "[model]") {
  ToyTransducer m = oracle::random_model(3);
  Mat<float> zeros(4, m.cfg.feat_dim, 0.0f);
  Mat<float> out = encoder_forward(m, zeros);
  REQUIRE(out.rows == 4);
  REQUIRE(out.cols == m.cfg.enc_dim);
  for (int32_t t = 1; t < 4; ++t)
    for (int32_t d = 0; d < out.cols; ++d)
      CHECK(out.at(t, d) == out.at(0, d));

  CHECK(encoder_forward(m, Mat<float>(0, m.cfg.feat_dim)).rows == 0);

  std::mt19937_64 rng(5);
  for (int32_t T : {1, 3, 9}) {
    Mat<float> f = oracle::random_features(rng, T, m.cfg.feat_dim);
    Mat<float> e = encoder_forward(m, f);
    CHECK(e.rows == T);
    CHECK(e.cols == m.cfg.enc_dim);
    for (float v : e.data) CHECK(std::isfinite(v));
  }
}

TEST_CASE("decoder rows are pure functions of their context", "[model]") {
  ToyTransducer m = oracle::random_model(11);
  const int32_t V = m.cfg.vocab_size;
  int32_t c1 = pack_context(1, 2, V);
  int32_t c2 = pack_context(0, 0, V);

  Mat<float> dup = decoder_forward(m, {c1, c2, c1});
  for (int32_t d = 0; d < dup.cols; ++d)
    CHECK(dup.at(0, d) == dup.at(2, d));

  // Batch composition cannot change a row.
  Mat<float> solo = decoder_forward(m, {c1});
  for (int32_t d = 0; d < solo.cols; ++d)
    CHECK(solo.at(0, d) == dup.at(0, d));

  // Permuting inputs permutes rows.
  Mat<float> ab = decoder_forward(m, {c1, c2});
  Mat<float> ba = decoder_forward(m, {c2, c1});
  for (int32_t d = 0; d < ab.cols; ++d) {
    CHECK(ab.at(0, d) == ba.at(1, d));
    CHECK(ab.at(1, d) == ba.at(0, d));
  }

  CHECK_THROWS_AS(decoder_forward(m, {V * V}), ValidationError);
  CHECK_THROWS_AS(decoder_forward(m, {-1}), ValidationError);
}

TEST_CASE("joiner emits normalized log-distributions", "[model]") {
  std::mt19937_64 rng(13);
  for (int32_t V : {2, 4, 6}) {
    ToyTransducer m = oracle::random_model(V + 100, V, V);
    Mat<float> f = oracle::random_features(rng, 2, V);
    Mat<float> enc = encoder_forward(m, f);
    Mat<float> dec = decoder_forward(m, {pack_context(0, 0, V)});
    std::vector<float> lp = joiner_forward(m, enc.row(0), dec.row(0));
    REQUIRE(static_cast<int32_t>(lp.size()) == V);
    double s = 0.0;
    for (float v : lp) s += std::exp(static_cast<double>(v));
    CHECK(std::abs(std::log(s)) <= 1e-5);

    std::vector<float> again = joiner_forward(m, enc.row(0), dec.row(0));
    CHECK(lp == again);
  }
}

TEST_CASE("full_grid agrees with pointwise joiner calls", "[model]") {
  std::mt19937_64 rng(17);
  ToyTransducer m = oracle::random_model(19);
  const int32_t V = m.cfg.vocab_size;
  Mat<float> f = oracle::random_features(rng, 6, m.cfg.feat_dim);
  std::vector<int32_t> targets = {2, 1, 3};
  LogProbGrid g = full_grid(m, f, targets);
  CHECK(g.T == 6);
  CHECK(g.U == 3);
  for (double v : g.blank_lp.data) CHECK(v <= 0.0);
  for (double v : g.symbol_lp.data) CHECK(v <= 0.0);

  Mat<float> enc = encoder_forward(m, f);
  std::uniform_int_distribution<int32_t> td(0, 5), ud(0, 3);
  for (int check = 0; check < 5; ++check) {
    int32_t t = td(rng), u = ud(rng);
    int32_t ctx = context_of_prefix(targets, u, V);
    Mat<float> dec = decoder_forward(m, {ctx});
    std::vector<float> lp = joiner_forward(m, enc.row(t), dec.row(0));
    CHECK(g.blank_lp.at(t, u) ==
          Catch::Approx(static_cast<double>(lp[0])).margin(1e-6));
    if (u < 3)
      CHECK(g.symbol_lp.at(t, u) ==
            Catch::Approx(static_cast<double>(lp[targets[u]])).margin(1e-6));
  }

  LogProbGrid empty = full_grid(m, f, {});
  CHECK(empty.U == 0);
  CHECK(empty.blank_lp.cols == 1);
  CHECK(empty.symbol_lp.data.empty());
}

TEST_CASE("checkpoints round-trip bit-exactly", "[model]") {
  ToyTransducer m = oracle::random_model(23);
  std::string path = temp_path("rnnt_test_ckpt.bin");
  save_checkpoint(m, path);
  ToyTransducer loaded = load_checkpoint(path);
  CHECK(params_equal(m, loaded));
  CHECK(loaded.cfg.vocab_size == m.cfg.vocab_size);
  CHECK(loaded.cfg.seed == m.cfg.seed);

  // Truncation corrupts the file.
  std::error_code ec;
  auto full = std::filesystem::file_size(path, ec);
  REQUIRE(!ec);
  std::filesystem::resize_file(path, full / 2);
  CHECK_THROWS_AS(load_checkpoint(path), ValidationError);
  std::filesystem::remove(path);
}

TEST_CASE("decode results survive a checkpoint round-trip", "[model]") {
  ToyTransducer m = oracle::random_model(29);
  std::string path = temp_path("rnnt_test_ckpt2.bin");
  save_checkpoint(m, path);
  ToyTransducer loaded = load_checkpoint(path);
  std::filesystem::remove(path);

  std::mt19937_64 rng(31);
  for (int i = 0; i < 10; ++i) {
    Mat<float> f = oracle::random_features(rng, 3 + i % 5, m.cfg.feat_dim);
    CHECK(greedy_search(m, f, 1) == greedy_search(loaded, f, 1));
  }
}

TEST_CASE("synthetic data renders exact templates without noise", "[model]") {
  SyntheticDataset ds = synth_dataset(1, 3, 5, 2, 4, 3, 0.0);
  CHECK(ds.vocab_size == 5);
  CHECK(ds.feat_dim == 5);
  REQUIRE(ds.items.size() == 3);
  for (const DatasetItem& item : ds.items) {
    int32_t U = static_cast<int32_t>(item.targets.size());
    CHECK(U >= 2);
    CHECK(U <= 4);
    REQUIRE(item.features.rows == kLeadInFrames + 3 * U + kLeadOutFrames);
    for (int32_t t = 0; t < item.features.rows; ++t) {
      int32_t tok = 0;
      if (t >= kLeadInFrames && t < kLeadInFrames + 3 * U)
        tok = item.targets[(t - kLeadInFrames) / 3];
      for (int32_t d = 0; d < 5; ++d)
        CHECK(item.features.at(t, d) == (d == tok ? 1.0f : 0.0f));
    }
  }

  CHECK(synth_dataset(1, 0, 5, 2, 4).items.empty());
}

TEST_CASE("synthetic target lengths are uniform across the range",
          "[model]") {
  SyntheticDataset ds = synth_dataset(42, 1000, 4, 3, 8);
  std::vector<int32_t> counts(6, 0);
  for (const DatasetItem& item : ds.items) {
    int32_t len = static_cast<int32_t>(item.targets.size());
    REQUIRE(len >= 3);
    REQUIRE(len <= 8);
    counts[len - 3]++;
  }
  double expected = 1000.0 / 6.0;
  double chi2 = 0.0;
  for (int32_t c : counts)
    chi2 += (c - expected) * (c - expected) / expected;
  // 5 degrees of freedom; 20.52 is the 0.999 quantile.
  CHECK(chi2 < 20.52);
}

TEST_CASE("dataset save and load round-trip", "[model]") {
  SyntheticDataset ds = synth_dataset(9, 4, 4, 1, 3);
  std::string dir = temp_path("rnnt_test_ds");
  save_dataset(ds, dir);
  SyntheticDataset back = load_dataset(dir);
  std::filesystem::remove_all(dir);
  REQUIRE(back.items.size() == ds.items.size());
  CHECK(back.vocab_size == ds.vocab_size);
  for (size_t i = 0; i < ds.items.size(); ++i) {
    CHECK(back.items[i].targets == ds.items[i].targets);
    CHECK(back.items[i].features.data == ds.items[i].features.data);
  }
}

TEST_CASE("training with zero learning rate is a no-op", "[model]") {
  SyntheticDataset ds = synth_dataset(0, 6, 4, 1, 3);
  ModelConfig cfg;
  cfg.vocab_size = 4;
  cfg.feat_dim = 4;
  ToyTransducer init = init_model(cfg);
  TrainOptions opt;
  opt.epochs = 1;
  opt.lr = 0.0;
  ToyTransducer trained = train(init_model(cfg), ds, opt);
  CHECK(params_equal(init, trained));
}

TEST_CASE("training loss decreases over the first epochs", "[model]") {
  SyntheticDataset ds = synth_dataset(0, 40, 4, 2, 4);
  ModelConfig cfg;
  cfg.vocab_size = 4;
  cfg.feat_dim = 4;
  TrainOptions opt;
  opt.epochs = 5;
  TrainStats stats;
  train(init_model(cfg), ds, opt, &stats);
  REQUIRE(stats.epoch_mean_loss.size() == 5);
  for (size_t e = 1; e < stats.epoch_mean_loss.size(); ++e)
    CHECK(stats.epoch_mean_loss[e] < stats.epoch_mean_loss[e - 1]);
  CHECK(stats.updates > 0);
}

TEST_CASE("training is reproducible for a fixed seed", "[model]") {
  SyntheticDataset ds = synth_dataset(3, 8, 4, 1, 3);
  ModelConfig cfg;
  cfg.vocab_size = 4;
  cfg.feat_dim = 4;
  TrainOptions opt;
  opt.epochs = 2;
  ToyTransducer a = train(init_model(cfg), ds, opt);
  ToyTransducer b = train(init_model(cfg), ds, opt);
  CHECK(params_equal(a, b));
}

TEST_CASE("backpropagated parameter gradients track finite differences",
          "[model]") {
  SyntheticDataset ds = synth_dataset(12, 1, 4, 2, 2);
  ModelConfig cfg;
  cfg.vocab_size = 4;
  cfg.feat_dim = 4;
  cfg.enc_dim = 6;
  cfg.emb_dim = 6;
  cfg.joiner_dim = 6;
  ToyTransducer m = init_model(cfg);
  TrainOptions opt;

  detail::ModelGrads grads(m);
  double base = detail::item_loss_and_grads(m, ds.items[0], opt, grads);
  REQUIRE(std::isfinite(base));

  auto views = m.param_views();
  auto gviews = grads.views();
  std::mt19937_64 rng(2);
  int32_t checked = 0;
  for (size_t p = 0; p < views.size(); ++p) {
    Mat<float>* param = views[p].second;
    if (param->data.empty()) continue;
    std::uniform_int_distribution<size_t> pick(0, param->data.size() - 1);
    for (int rep = 0; rep < 2; ++rep) {
      size_t idx = pick(rng);
      float saved = param->data[idx];
      const float h = 1e-2f;
      param->data[idx] = saved + h;
      detail::ModelGrads sink1(m);
      double fp = detail::item_loss_and_grads(m, ds.items[0], opt, sink1);
      param->data[idx] = saved - h;
      detail::ModelGrads sink2(m);
      double fm = detail::item_loss_and_grads(m, ds.items[0], opt, sink2);
      param->data[idx] = saved;
      double fd = (fp - fm) / (2.0 * h);
      double an = gviews[p]->data[idx];
      double err = std::abs(fd - an) /
                   std::max({std::abs(fd), std::abs(an), 1e-3});
      CHECK(err <= 3e-2);
      ++checked;
    }
  }
  CHECK(checked >= 30);
}
