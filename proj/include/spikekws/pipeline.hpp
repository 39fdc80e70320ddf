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

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spikekws/checkpoint.hpp"
#include "spikekws/config.hpp"
#include "spikekws/dataset.hpp"
#include "spikekws/decision.hpp"
#include "spikekws/trainer.hpp"

// Command implementations shared by the CLI and the integration tests. Each
// run_* writes its fixed-name outputs under paths.out_dir.
namespace spikekws {

struct Corpus {
  Manifest manifest;
  std::vector<FeatureMatrix> features;  // by sample index; empty if not loaded
};

// Loads paths.manifest, or paths.dataset_root as a GSC tree, and computes
// features for the samples in `splits`.
Corpus load_corpus(const RunConfig& config, const FbankConfig& features, const std::vector<Split>& splits,
                   std::size_t threads);

struct TrainOutcome {
  Checkpoint checkpoint;
  std::vector<EpochMetrics> history;
};

// Writes checkpoint.json, epochs.csv and config.toml.
TrainOutcome run_train(const RunConfig& config, std::ostream* log);

struct EvalOptions {
  bool sweep = false;
  std::optional<double> threshold;  // overrides decision.threshold_c
};

struct EvalOutcome {
  std::optional<SweepResult> sweep;        // rows on the validation split
  std::vector<EvalReport> sweep_test;      // same grid on the test split
  double threshold_c = 0.0;
  EvalReport test;
  std::vector<std::size_t> test_indices;   // manifest indices of the test samples
  std::vector<SampleRun> test_runs;
};

// Writes eval.json and per_sample.csv. With a sweep, C is picked on the
// validation split and reported on the test split.
EvalOutcome run_eval(const RunConfig& config, const Checkpoint& checkpoint, const EvalOptions& options,
                     std::ostream* log);

struct StreamOutcome {
  DecisionOutcome outcome;
  std::string label;
  std::string json;  // one-line summary
};

// Decides on one WAV file; writes trace.csv (t, cs, spike_rate) when
// `trace_path` is set.
StreamOutcome run_stream(const Checkpoint& checkpoint, const std::filesystem::path& wav,
                         const DecisionConfig& decision, const EnergyModel& energy,
                         const std::optional<std::filesystem::path>& trace_path);

// Energy of early and late decisions, for one WAV or averaged over the test
// split. Writes energy.json, plus spike_rate.csv (t, rate) for a WAV.
std::string run_energy_report(const RunConfig& config, const Checkpoint& checkpoint, const DecisionConfig& decision,
                              const std::optional<std::filesystem::path>& wav);

Manifest run_dataset_gen(const RunConfig& config);

std::string format_number(double x);

}  // namespace spikekws
