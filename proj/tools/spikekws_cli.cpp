// Copyright (c) 2026 The spikekws Authors
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


// spikekws: dataset generation, training, evaluation, streaming decisions and
// energy reports. Errors go to stderr as one JSON line; exit code 1.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "spikekws/checkpoint.hpp"
#include "spikekws/config.hpp"
#include "spikekws/pipeline.hpp"

namespace {

namespace fs = std::filesystem;
using namespace spikekws;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::optional<double> threshold;
  std::string out_dir;
  std::string manifest;
  std::string checkpoint;
};

void add_common(CLI::App* cmd, Overrides& o, bool config_required) {
  auto* c = cmd->add_option("--config", o.config, "TOML run config");
  if (config_required) c->required();
  cmd->add_option("--seed", o.seed, "override the config seed");
  cmd->add_option("--threads", o.threads, "worker threads; 0 = all cores, 1 = bit-exact");
  cmd->add_option("--out-dir", o.out_dir, "output directory");
}

RunConfig resolve(const Overrides& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_run_config(o.config);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.train.seed = *o.seed + 1;
  }
  if (o.threads) cfg.train.threads = *o.threads;
  if (o.threshold) cfg.decision.threshold_c = *o.threshold;
  if (!o.out_dir.empty()) cfg.paths.out_dir = o.out_dir;
  if (!o.manifest.empty()) cfg.paths.manifest = o.manifest;
  if (!o.checkpoint.empty()) cfg.paths.checkpoint = o.checkpoint;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spiking keyword spotting with early decisions"};
  app.require_subcommand(1);

  Overrides o;
  bool sweep = false;
  std::string wav;
  bool trace = false;

  auto* train = app.add_subcommand("train", "train a network; writes checkpoint.json, epochs.csv, config.toml");
  add_common(train, o, true);
  train->add_option("--manifest", o.manifest, "JSON-lines manifest");

  auto* eval = app.add_subcommand("eval", "evaluate on the test split; writes eval.json, per_sample.csv");
  add_common(eval, o, true);
  eval->add_option("--manifest", o.manifest, "JSON-lines manifest");
  eval->add_option("--checkpoint", o.checkpoint, "checkpoint.json");
  eval->add_option("--threshold", o.threshold, "confidence threshold C");
  eval->add_flag("--sweep", sweep, "sweep C on validation, report on test");

  auto* stream = app.add_subcommand("stream", "decide on one WAV; prints a JSON line");
  add_common(stream, o, false);
  stream->add_option("--checkpoint", o.checkpoint, "checkpoint.json");
  stream->add_option("--wav", wav, "16-bit mono PCM WAV")->required();
  stream->add_option("--threshold", o.threshold, "confidence threshold C");
  stream->add_flag("--trace", trace, "write trace.csv (t, cs, spike_rate) to the output directory");

  auto* gen = app.add_subcommand("dataset-gen", "write a synthetic corpus and manifest.jsonl");
  add_common(gen, o, false);

  auto* energy = app.add_subcommand("energy-report", "energy of early and late decisions; writes energy.json");
  add_common(energy, o, true);
  energy->add_option("--manifest", o.manifest, "JSON-lines manifest");
  energy->add_option("--checkpoint", o.checkpoint, "checkpoint.json");
  energy->add_option("--threshold", o.threshold, "confidence threshold C");
  energy->add_option("--wav", wav, "report a single WAV instead of the test split");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  std::string command = app.get_subcommands().front()->get_name();
  try {
    RunConfig cfg = resolve(o);
    if (command == "train") {
      run_train(cfg, &std::cerr);
    } else if (command == "eval") {
      Checkpoint ckpt = load_checkpoint(cfg.checkpoint_path());
      EvalOptions opts;
      opts.sweep = sweep;
      opts.threshold = o.threshold;
      run_eval(cfg, ckpt, opts, &std::cerr);
    } else if (command == "stream") {
      Checkpoint ckpt = load_checkpoint(cfg.checkpoint_path());
      std::optional<fs::path> trace_path;
      if (trace) {
        fs::create_directories(cfg.paths.out_dir);
        trace_path = fs::path(cfg.paths.out_dir) / "trace.csv";
      }
      StreamOutcome out = run_stream(ckpt, wav, cfg.decision, cfg.energy, trace_path);
      std::cout << out.json << "\n";
    } else if (command == "dataset-gen") {
      Manifest m = run_dataset_gen(cfg);
      std::cerr << "wrote " << m.samples.size() << " clips to " << cfg.paths.out_dir << "\n";
    } else {
      Checkpoint ckpt = load_checkpoint(cfg.checkpoint_path());
      std::optional<fs::path> w;
      if (!wav.empty()) w = wav;
      std::cout << run_energy_report(cfg, ckpt, cfg.decision, w) << "\n";
    }
  } catch (const std::exception& e) {
    nlohmann::ordered_json err;
    err["error"] = e.what();
    err["command"] = command;
    std::cerr << err.dump() << "\n";
    return 1;
  }
  return 0;
}
