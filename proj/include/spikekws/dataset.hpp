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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spikekws/rng.hpp"

namespace spikekws {

enum class Split { kTrain, kVal, kTest };

std::string to_string(Split split);
Split parse_split(const std::string& name);

struct Sample {
  std::filesystem::path audio_path;
  std::size_t label = 0;
  std::optional<double> t_begin;  // seconds from clip start
  std::optional<double> t_end;
  Split split = Split::kTrain;

  bool operator==(const Sample&) const = default;
};

struct Manifest {
  std::vector<Sample> samples;
  std::vector<std::string> classes;
  int sample_rate = 16000;
  double clip_seconds = 1.0;

  bool operator==(const Manifest&) const = default;

  // Unique class names, labels in range, timestamps inside the clip, and
  // every audio file in exactly one split.
  void validate() const;
  std::vector<std::size_t> indices(Split split) const;
  std::size_t clip_samples() const;
};

// Google Speech Commands layout: one directory per keyword plus
// validation_list.txt and testing_list.txt. Directories starting with '_'
// are skipped.
Manifest load_gsc(const std::filesystem::path& root);

// JSON-lines manifest. An optional first line carries
//   {"classes": [...], "sample_rate": 16000, "clip_seconds": 1.0}
// and every other line is one sample:
//   {"path": "a.wav", "label": "go", "t_begin": 0.12, "t_end": 0.71, "split": "train"}
// Relative paths resolve against the manifest's directory. Without a header
// the class list is the sorted set of labels.
Manifest load_manifest(const std::filesystem::path& path);
Manifest parse_manifest(const std::string& text, const std::filesystem::path& base_dir);
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

// Reads a sample's audio, zero-padding short clips to clip_seconds.
// Longer clips are rejected.
std::vector<double> load_clip(const Manifest& manifest, const Sample& sample);

struct SynthOptions {
  std::size_t n_classes = 10;
  std::size_t per_class = 200;
  std::uint64_t seed = 7;
  int sample_rate = 16000;
};

// Class k is a linear chirp from 300+60k Hz to 600+60k Hz at amplitude 0.5,
// lasting a random 0.4-1.0 s at a random offset inside a 1 s clip of uniform
// noise at amplitude 0.01. Within each class every 10th sample goes to val,
// the one after it to test. Writes class<k>/class<k>_<i>.wav files and
// manifest.jsonl under out_dir.
Manifest synth_dataset(const SynthOptions& options, const std::filesystem::path& out_dir);

// Draws a class uniformly, then a sample of that class uniformly, so every
// class is equally frequent regardless of its size.
class ClassBalancedSampler {
 public:
  ClassBalancedSampler(const Manifest& manifest, std::uint64_t seed, Split split = Split::kTrain);

  std::size_t next();

 private:
  std::vector<std::vector<std::size_t>> by_class_;
  Rng rng_;
};

}  // namespace spikekws
