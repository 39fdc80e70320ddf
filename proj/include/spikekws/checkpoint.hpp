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

#include <filesystem>
#include <string>
#include <vector>

#include "spikekws/features.hpp"
#include "spikekws/snn.hpp"

namespace spikekws {

inline constexpr int kCheckpointFormatVersion = 1;

// Everything needed to run a trained model on raw audio.
struct Checkpoint {
  Network net;
  FbankConfig features;
  std::vector<std::string> classes;
};

// Single JSON document: format_version, feature and network config, class
// names, input normalization and per-layer tensors as flat row-major lists.
std::string checkpoint_to_json(const Checkpoint& ckpt);
Checkpoint checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace spikekws
