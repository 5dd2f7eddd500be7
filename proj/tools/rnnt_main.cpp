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

// Command line front end. Subcommands: toygen, train, decode, graph,
// lattice, bench. Every run writes a manifest beside its outputs so a
// run can be reproduced from the recorded argv.
// Exit codes: 0 ok, 2 usage, 3 data or validation, 4 numeric abort.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "rnnt/rnnt.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr const char* kToolVersion = "1.0.0";
constexpr double kFrameShiftSeconds = 0.01;

// Flag combinations the library cannot serve; reported as usage errors.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GlobalOpts {
  uint64_t seed = 0;
  int32_t threads = 1;
  std::string out_dir;
  std::vector<std::string> argv;
};

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw rnnt::ValidationError("cannot write " + path);
  out << text;
  if (!out) throw rnnt::ValidationError("short write to " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw rnnt::ValidationError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_manifest(const GlobalOpts& g, const std::string& command) {
  ordered_json m;
  m["tool"] = "rnnt";
  m["version"] = kToolVersion;
  m["command"] = command;
  m["seed"] = g.seed;
  m["threads"] = g.threads;
  m["out_dir"] = g.out_dir;
  m["argv"] = g.argv;
  fs::create_directories(g.out_dir);
  write_text_file(g.out_dir + "/manifest_" + command + ".json",
                  m.dump(2) + "\n");
}

std::string ids_to_line(const std::vector<int32_t>& ids) {
  std::string s;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(ids[i]);
  }
  return s;
}

std::map<std::string, int32_t> parse_token_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw rnnt::ValidationError("cannot read " + path);
  std::map<std::string, int32_t> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string sym;
    long id = 0;
    if (!(ls >> sym)) continue;
    if (sym[0] == '#') continue;
    if (!(ls >> id))
      throw rnnt::ParseError("token line needs <symbol> <id>: " + line);
    out[sym] = static_cast<int32_t>(id);
  }
  return out;
}

rnnt::Fsa load_graph_arg(const std::string& arg, int32_t vocab_size) {
  if (arg == "trivial") return rnnt::trivial_graph(vocab_size);
  return rnnt::parse_fsa_text(read_text_file(arg));
}

// Index-sharded worker pool; rethrows the first worker exception.
void parallel_for(int32_t n, int32_t threads,
                  const std::function<void(int32_t)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int32_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int32_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  const int32_t workers = std::min(threads, n);
  for (int32_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int32_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

rnnt::Variant parse_variant(const std::string& s) {
  if (s == "regular") return rnnt::Variant::kRegular;
  if (s == "modified") return rnnt::Variant::kModified;
  return rnnt::Variant::kConstrained;
}

rnnt::MergeOp parse_merge_op(const std::string& s) {
  return s == "log_add" ? rnnt::MergeOp::kLogAdd : rnnt::MergeOp::kMax;
}

struct ToygenOpts {
  int32_t num = 100;
  int32_t vocab = 6;
  int32_t min_len = 3;
  int32_t max_len = 8;
  int32_t frames_per_token = 3;
  double noise_std = 0.1;
  std::string out;
};

void cmd_toygen(const GlobalOpts& g, const ToygenOpts& o) {
  write_manifest(g, "toygen");
  std::string out = o.out.empty() ? g.out_dir + "/dataset" : o.out;
  rnnt::SyntheticDataset ds =
      rnnt::synth_dataset(g.seed, o.num, o.vocab, o.min_len, o.max_len,
                          o.frames_per_token, o.noise_std);
  rnnt::save_dataset(ds, out);
  std::cout << "wrote " << ds.items.size() << " utterances to " << out
            << "\n";
}

struct TrainOpts {
  std::string data;
  std::string out;
  std::string variant = "constrained";
  double lm_scale = 0.25;
  double lambda_simple = 0.3;
  double lr = 0.1;
  int32_t epochs = 10;
  int32_t grad_accum = 4;
};

void cmd_train(const GlobalOpts& g, const TrainOpts& o) {
  write_manifest(g, "train");
  rnnt::SyntheticDataset ds = rnnt::load_dataset(o.data);
  rnnt::ModelConfig cfg;
  cfg.vocab_size = ds.vocab_size;
  cfg.feat_dim = ds.feat_dim;
  cfg.seed = g.seed;
  rnnt::ToyTransducer model = rnnt::init_model(cfg);

  rnnt::TrainOptions topts;
  topts.variant = parse_variant(o.variant);
  topts.lm_scale = o.lm_scale;
  topts.lambda_simple = o.lambda_simple;
  topts.lr = o.lr;
  topts.epochs = o.epochs;
  topts.grad_accum = o.grad_accum;

  rnnt::TrainStats stats;
  model = rnnt::train(std::move(model), ds, topts, &stats);

  std::string out = o.out.empty() ? g.out_dir + "/model.ckpt" : o.out;
  rnnt::save_checkpoint(model, out);

  std::string hist;
  for (double v : stats.epoch_mean_loss) hist += fmt_double(v) + "\n";
  write_text_file(g.out_dir + "/loss_history.txt", hist);

  std::cout << "checkpoint " << out << "\n";
  for (size_t e = 0; e < stats.epoch_mean_loss.size(); ++e)
    std::cout << "epoch " << e << " mean_loss "
              << fmt_double(stats.epoch_mean_loss[e]) << "\n";
  std::cout << "skipped_items " << stats.skipped_items << " updates "
            << stats.updates << "\n";
}

struct DecodeOpts {
  std::string checkpoint;
  std::string data;
  std::string method = "greedy";
  int32_t max_symbols = 1;
  int32_t beam_size = 4;
  std::string merge_op = "max";
  bool length_norm = false;
  std::string graph = "trivial";
  double beam = 20.0;
  int32_t max_states = 64;
  int32_t max_contexts = 8;
  bool batched = false;
};

void cmd_decode(const GlobalOpts& g, const DecodeOpts& o) {
  if (o.batched && o.method == "greedy" && o.max_symbols > 1)
    throw UsageError("batched greedy requires --max-symbols 1");
  if (o.batched && o.method == "beam")
    throw UsageError("hypothesis-list beam search has no batched mode");
  write_manifest(g, "decode");

  rnnt::ToyTransducer model = rnnt::load_checkpoint(o.checkpoint);
  rnnt::SyntheticDataset ds = rnnt::load_dataset(o.data);
  if (ds.feat_dim != model.cfg.feat_dim)
    throw rnnt::ValidationError("dataset feat_dim does not match checkpoint");

  const int32_t n = static_cast<int32_t>(ds.items.size());
  std::vector<std::vector<int32_t>> hyps(n);

  if (o.method == "greedy") {
    if (o.batched) {
      std::vector<rnnt::Mat<float>> feats;
      feats.reserve(n);
      for (const auto& it : ds.items) feats.push_back(it.features);
      hyps = rnnt::greedy_search_batch(model, feats, 1);
    } else {
      parallel_for(n, g.threads, [&](int32_t i) {
        hyps[i] =
            rnnt::greedy_search(model, ds.items[i].features, o.max_symbols);
      });
    }
  } else if (o.method == "beam") {
    rnnt::SearchParams params;
    params.max_symbols = o.max_symbols;
    params.beam_size = o.beam_size;
    params.merge_op = parse_merge_op(o.merge_op);
    params.length_norm = o.length_norm;
    parallel_for(n, g.threads, [&](int32_t i) {
      hyps[i] = rnnt::beam_search(model, ds.items[i].features, params);
    });
  } else {
    rnnt::Fsa graph = load_graph_arg(o.graph, model.cfg.vocab_size);
    rnnt::FsaSearchParams params;
    params.beam = o.beam;
    params.max_states = o.max_states;
    params.max_contexts = o.max_contexts;
    std::vector<rnnt::Mat<float>> feats;
    feats.reserve(n);
    for (const auto& it : ds.items) feats.push_back(it.features);
    std::vector<rnnt::Fsa> graphs(n, graph);
    std::vector<rnnt::Fsa> lattices =
        rnnt::fsa_beam_search(model, feats, graphs, params);
    rnnt::MergeOp merge = parse_merge_op(o.merge_op);
    for (int32_t i = 0; i < n; ++i) {
      hyps[i] = rnnt::lattice_to_best_seq(lattices[i], merge, 100, g.seed);
      char name[32];
      std::snprintf(name, sizeof(name), "lattice_%04d.txt", i);
      write_text_file(
          g.out_dir + "/" + name,
          rnnt::serialize_lattice(lattices[i], i, ds.items[i].features.rows));
    }
  }

  std::string transcripts;
  for (const auto& h : hyps) transcripts += ids_to_line(h) + "\n";
  write_text_file(g.out_dir + "/transcripts.txt", transcripts);

  std::vector<std::vector<int32_t>> refs;
  refs.reserve(n);
  for (const auto& it : ds.items) refs.push_back(it.targets);
  double acc = rnnt::token_accuracy(refs, hyps);

  ordered_json report;
  report["method"] = o.method;
  report["num_utterances"] = n;
  report["token_accuracy"] = acc;
  write_text_file(g.out_dir + "/report.json", report.dump(2) + "\n");
  std::cout << "token_accuracy " << fmt_double(acc) << "\n";
}

struct GraphOpts {
  int32_t vocab = 6;
  std::string arpa;
  std::string tokens;
  std::string out;
  bool ngram = false;
};

void cmd_graph(const GlobalOpts& g, const GraphOpts& o) {
  write_manifest(g, "graph");
  std::string out = o.out.empty() ? g.out_dir + "/graph.fsa" : o.out;
  rnnt::Fsa fsa;
  if (o.ngram) {
    fsa = rnnt::ngram_graph_from_arpa(read_text_file(o.arpa),
                                      parse_token_file(o.tokens));
  } else {
    fsa = rnnt::trivial_graph(o.vocab);
  }
  write_text_file(out, rnnt::serialize_fsa_text(fsa));
  std::cout << "wrote " << out << " states " << fsa.num_states << " arcs "
            << fsa.arcs.size() << "\n";
}

struct LatticeOpts {
  std::string file;
  std::string mode;  // best-path | total | nbest
  int32_t n = 10;
};

void cmd_lattice(const GlobalOpts& g, const LatticeOpts& o) {
  write_manifest(g, "lattice");
  rnnt::Fsa fsa = rnnt::parse_fsa_text(read_text_file(o.file));
  if (o.mode == "best-path") {
    rnnt::Path p = rnnt::best_path(fsa);
    std::vector<int32_t> tokens;
    for (int32_t lab : p.labels)
      if (lab != 0) tokens.push_back(lab);
    std::cout << "score " << fmt_double(p.score) << "\n";
    std::cout << "alignment " << ids_to_line(p.labels) << "\n";
    std::cout << "tokens " << ids_to_line(tokens) << "\n";
  } else if (o.mode == "total") {
    std::cout << "total_logprob " << fmt_double(rnnt::total_logprob(fsa))
              << "\n";
  } else {
    std::vector<rnnt::Path> paths = rnnt::sample_nbest(fsa, o.n, g.seed);
    for (const rnnt::Path& p : paths) {
      std::vector<int32_t> tokens;
      for (int32_t lab : p.labels)
        if (lab != 0) tokens.push_back(lab);
      std::cout << fmt_double(p.score) << " " << ids_to_line(tokens) << "\n";
    }
  }
}

struct BenchOpts {
  std::string checkpoint;
  std::string data;
  std::vector<std::string> methods = {"greedy", "beam", "fsa-beam"};
  int32_t batch_size = 64;
  int32_t repeats = 5;
  int32_t beam_size = 4;
  double beam = 20.0;
  int32_t max_states = 64;
  int32_t max_contexts = 8;
};

void cmd_bench(const GlobalOpts& g, const BenchOpts& o) {
  write_manifest(g, "bench");
  rnnt::ToyTransducer model = rnnt::load_checkpoint(o.checkpoint);
  rnnt::SyntheticDataset ds = rnnt::load_dataset(o.data);
  if (static_cast<int32_t>(ds.items.size()) < o.batch_size)
    throw rnnt::ValidationError("dataset smaller than --batch-size");

  std::vector<rnnt::Mat<float>> feats;
  double audio_seconds = 0.0;
  for (int32_t i = 0; i < o.batch_size; ++i) {
    feats.push_back(ds.items[i].features);
    audio_seconds += ds.items[i].features.rows * kFrameShiftSeconds;
  }

  rnnt::SearchParams beam_params;
  beam_params.beam_size = o.beam_size;
  beam_params.max_symbols = rnnt::kNoSymbolLimit;
  rnnt::FsaSearchParams fsa_params;
  fsa_params.beam = o.beam;
  fsa_params.max_states = o.max_states;
  fsa_params.max_contexts = o.max_contexts;
  rnnt::Fsa graph = rnnt::trivial_graph(model.cfg.vocab_size);

  size_t sink = 0;
  auto make_run = [&](const std::string& method,
                      bool batched) -> std::function<void()> {
    if (method == "greedy") {
      if (batched)
        return [&] {
          for (const auto& h : rnnt::greedy_search_batch(model, feats, 1))
            sink += h.size();
        };
      return [&] {
        for (const auto& f : feats)
          sink += rnnt::greedy_search(model, f, 1).size();
      };
    }
    if (method == "beam") {
      // No batched kernel exists; both rows time the per-utterance loop.
      return [&] {
        for (const auto& f : feats)
          sink += rnnt::beam_search(model, f, beam_params).size();
      };
    }
    if (batched)
      return [&] {
        std::vector<rnnt::Fsa> graphs(feats.size(), graph);
        sink += rnnt::fsa_beam_search(model, feats, graphs, fsa_params).size();
      };
    return [&] {
      for (const auto& f : feats) {
        std::vector<rnnt::Mat<float>> one{f};
        std::vector<rnnt::Fsa> graphs{graph};
        sink += rnnt::fsa_beam_search(model, one, graphs, fsa_params).size();
      }
    };
  };

  std::string jsonl;
  std::printf("%-10s %-8s %14s %14s %12s\n", "method", "batched",
              "wall_med_sec", "audio_sec", "rtf");
  for (const std::string& method : o.methods) {
    for (bool batched : {true, false}) {
      std::function<void()> run = make_run(method, batched);
      run();  // warmup, untimed
      std::vector<double> times;
      for (int32_t r = 0; r < o.repeats; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        run();
        auto t1 = std::chrono::steady_clock::now();
        times.push_back(std::chrono::duration<double>(t1 - t0).count());
      }
      std::sort(times.begin(), times.end());
      double wall = times[times.size() / 2];
      double rtf = wall / audio_seconds;
      ordered_json row;
      row["method"] = method;
      row["batched"] = batched;
      row["batch_size"] = o.batch_size;
      row["repeats"] = o.repeats;
      row["wall_seconds_median"] = wall;
      row["audio_seconds"] = audio_seconds;
      row["rtf"] = rtf;
      if (method == "beam")
        row["note"] = "no batched kernel; per-utterance loop";
      jsonl += row.dump() + "\n";
      std::printf("%-10s %-8s %14.6f %14.3f %12.6f\n", method.c_str(),
                  batched ? "yes" : "no", wall, audio_seconds, rtf);
    }
  }
  write_text_file(g.out_dir + "/bench.jsonl", jsonl);
  if (sink == SIZE_MAX) std::cout << "";  // keep run() results observable
}

}  // namespace

int main(int argc, char** argv) {
  GlobalOpts g;
  const char* env_dir = std::getenv("RNNT_OUT_DIR");
  g.out_dir = env_dir ? env_dir : ".";
  g.argv.assign(argv, argv + argc);

  CLI::App app{"transducer decoding and loss toolkit"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  app.add_option("--seed", g.seed, "global RNG seed");
  app.add_option("--threads", g.threads, "worker threads for decode loops")
      ->check(CLI::Range(1, 1 << 16));
  app.add_option("--out-dir", g.out_dir,
                 "output directory (env RNNT_OUT_DIR, default .)");

  ToygenOpts togo;
  CLI::App* toygen = app.add_subcommand("toygen", "generate synthetic data");
  toygen->fallthrough();
  toygen->add_option("--num", togo.num, "number of utterances")
      ->check(CLI::NonNegativeNumber);
  toygen->add_option("--vocab", togo.vocab, "vocabulary size incl blank");
  toygen->add_option("--min-len", togo.min_len, "min target length");
  toygen->add_option("--max-len", togo.max_len, "max target length");
  toygen->add_option("--frames-per-token", togo.frames_per_token,
                     "frames emitted per token");
  toygen->add_option("--noise-std", togo.noise_std, "feature noise stddev");
  toygen->add_option("--out", togo.out, "dataset dir (default <out-dir>/dataset)");

  TrainOpts tro;
  CLI::App* train = app.add_subcommand("train", "train the toy transducer");
  train->fallthrough();
  train->add_option("data", tro.data, "dataset dir")->required();
  train->add_option("--out", tro.out,
                    "checkpoint path (default <out-dir>/model.ckpt)");
  train->add_option("--variant", tro.variant, "loss recursion")
      ->check(CLI::IsMember({"regular", "modified", "constrained"}));
  train->add_option("--lm-scale", tro.lm_scale, "decoder-only head scale");
  train->add_option("--lambda-simple", tro.lambda_simple,
                    "trivial-joiner loss weight");
  train->add_option("--epochs", tro.epochs)->check(CLI::PositiveNumber);
  train->add_option("--lr", tro.lr, "SGD learning rate");
  train->add_option("--grad-accum", tro.grad_accum, "items per update")
      ->check(CLI::PositiveNumber);

  DecodeOpts deo;
  CLI::App* decode = app.add_subcommand("decode", "decode a dataset");
  decode->fallthrough();
  decode->add_option("checkpoint", deo.checkpoint)->required();
  decode->add_option("data", deo.data, "dataset dir")->required();
  decode->add_option("--method", deo.method)
      ->check(CLI::IsMember({"greedy", "beam", "fsa-beam"}));
  decode->add_option("--max-symbols", deo.max_symbols,
                     "per-frame symbol cap for greedy and beam")
      ->check(CLI::PositiveNumber);
  decode->add_option("--beam-size", deo.beam_size, "hypothesis list width")
      ->check(CLI::PositiveNumber);
  decode->add_option("--merge-op", deo.merge_op,
                     "duplicate-sequence merge rule")
      ->check(CLI::IsMember({"max", "log_add"}));
  decode->add_flag("--length-norm", deo.length_norm,
                   "divide scores by token count at selection");
  decode->add_option("--graph", deo.graph,
                     "fsa-beam decoding graph: 'trivial' or fsa text file");
  decode->add_option("--beam", deo.beam, "fsa-beam score width");
  decode->add_option("--max-states", deo.max_states)
      ->check(CLI::PositiveNumber);
  decode->add_option("--max-contexts", deo.max_contexts)
      ->check(CLI::PositiveNumber);
  decode->add_flag("--batched", deo.batched, "use the batched kernel");

  GraphOpts gro;
  CLI::App* graph = app.add_subcommand("graph", "build a decoding graph");
  graph->fallthrough();
  graph->require_subcommand(1);
  CLI::App* gtriv = graph->add_subcommand("trivial", "one-state full-vocab");
  gtriv->fallthrough();
  gtriv->add_option("--vocab", gro.vocab, "vocabulary size incl blank")
      ->required();
  CLI::App* gngram = graph->add_subcommand("ngram", "token n-gram LM graph");
  gngram->fallthrough();
  gngram->add_option("--arpa", gro.arpa, "ARPA file")->required();
  gngram->add_option("--tokens", gro.tokens, "symbol to id table")
      ->required();
  graph->add_option("--out", gro.out,
                    "output path (default <out-dir>/graph.fsa)");

  LatticeOpts lao;
  CLI::App* lattice = app.add_subcommand("lattice", "query a lattice file");
  lattice->fallthrough();
  lattice->require_subcommand(1);
  CLI::App* lbest = lattice->add_subcommand("best-path", "highest scoring path");
  CLI::App* ltotal = lattice->add_subcommand("total", "log sum over paths");
  CLI::App* lnbest = lattice->add_subcommand("nbest", "sample n paths");
  for (CLI::App* sub : {lbest, ltotal, lnbest}) {
    sub->fallthrough();
    sub->add_option("file", lao.file, "lattice text file")->required();
  }
  lnbest->add_option("--n", lao.n, "paths to sample")
      ->check(CLI::PositiveNumber);

  BenchOpts beo;
  CLI::App* bench = app.add_subcommand("bench", "time decoding methods");
  bench->fallthrough();
  bench->add_option("checkpoint", beo.checkpoint)->required();
  bench->add_option("data", beo.data, "dataset dir")->required();
  bench->add_option("--methods", beo.methods, "comma separated list")
      ->delimiter(',')
      ->check(CLI::IsMember({"greedy", "beam", "fsa-beam"}));
  bench->add_option("--batch-size", beo.batch_size)
      ->check(CLI::PositiveNumber);
  bench->add_option("--repeats", beo.repeats)->check(CLI::PositiveNumber);
  bench->add_option("--beam-size", beo.beam_size)
      ->check(CLI::PositiveNumber);
  bench->add_option("--beam", beo.beam, "fsa-beam score width");
  bench->add_option("--max-states", beo.max_states)
      ->check(CLI::PositiveNumber);
  bench->add_option("--max-contexts", beo.max_contexts)
      ->check(CLI::PositiveNumber);

  toygen->callback([&] { cmd_toygen(g, togo); });
  train->callback([&] { cmd_train(g, tro); });
  decode->callback([&] { cmd_decode(g, deo); });
  gtriv->callback([&] {
    gro.ngram = false;
    cmd_graph(g, gro);
  });
  gngram->callback([&] {
    gro.ngram = true;
    cmd_graph(g, gro);
  });
  lbest->callback([&] {
    lao.mode = "best-path";
    cmd_lattice(g, lao);
  });
  ltotal->callback([&] {
    lao.mode = "total";
    cmd_lattice(g, lao);
  });
  lnbest->callback([&] {
    lao.mode = "nbest";
    cmd_lattice(g, lao);
  });
  bench->callback([&] { cmd_bench(g, beo); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const rnnt::ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const rnnt::ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 3;
  } catch (const rnnt::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
