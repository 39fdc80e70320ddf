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
#include <vector>

namespace spikekws {

struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::size_t num_samples = 0;  // per channel
};

// Only 16-bit little-endian PCM, mono, at `expected_rate` is accepted. Any
// other layout raises Error naming the file and the offending field.
std::vector<double> read_wav(const std::filesystem::path& path, int expected_rate = 16000);

// Parses and validates the header without decoding samples.
WavInfo probe_wav(const std::filesystem::path& path, int expected_rate = 16000);

// Samples are clipped to [-1, 1] and quantized to int16 by rounding.
void write_wav(const std::filesystem::path& path, const std::vector<double>& samples,
               int sample_rate = 16000);

}  // namespace spikekws
