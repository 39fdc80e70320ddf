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

#include <cstdint>
#include <filesystem>
#include <string>

#include "spikekws/dataset.hpp"
#include "spikekws/decision.hpp"
#include "spikekws/energy.hpp"
#include "spikekws/features.hpp"
#include "spikekws/snn.hpp"
#include "spikekws/trainer.hpp"

namespace spikekws {

struct PathsConfig {
  std::string dataset_root;  // GSC-style directory; used when manifest is empty
  std::string manifest;      // JSON-lines manifest
  std::string checkpoint;    // defaults to <out_dir>/checkpoint.json
  std::string out_dir = "out";

  bool operator==(const PathsConfig&) const = default;
};

struct DatasetGenConfig {
  std::size_t n_classes = 10;
  std::size_t per_class = 200;

  bool operator==(const DatasetGenConfig&) const = default;
};

// Everything a command needs. The single `seed` drives network init
// (seed), training order (seed + 1) and synthetic corpora (seed).
struct RunConfig {
  std::uint64_t seed = 0;
  FbankConfig features;
  NetworkConfig network;
  TrainConfig train;
  DecisionConfig decision;
  EnergyModel energy;
  PathsConfig paths;
  DatasetGenConfig dataset_gen;

  // Checks every nested invariant and the feature/network width agreement.
  void validate() const;
  std::filesystem::path checkpoint_path() const;

  bool operator==(const RunConfig&) const = default;
};

// TOML with one table per module: [features] [network] [train] [decision]
// [energy] [paths] [dataset_gen], plus a top-level `seed`. Missing keys keep
// their defaults; unknown keys are rejected.
RunConfig parse_run_config(const std::string& toml_text);
RunConfig load_run_config(const std::filesystem::path& path);

// Fully resolved config, suitable for echoing next to run outputs.
std::string to_toml(const RunConfig& config);

}  // namespace spikekws
