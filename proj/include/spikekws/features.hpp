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
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace spikekws {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct FbankConfig {
  int sample_rate = 16000;
  int window_len = 400;  // 25 ms
  int hop_len = 160;     // 10 ms, the only hop giving 98 frames per second of audio
  int n_filters = 40;
  int n_fft = 512;
  double fmin = 0.0;
  double fmax = 8000.0;
  double log_floor = 1e-10;
  // Global mean/variance normalization. Statistics come from the training
  // split and travel with the checkpoint.
  bool normalize = false;

  // Throws Error when an invariant does not hold.
  void validate() const;
  std::size_t num_bins() const { return static_cast<std::size_t>(n_fft / 2 + 1); }
  std::size_t num_frames(std::size_t num_samples) const;

  bool operator==(const FbankConfig&) const = default;
};

// One row per frame (timestep), one column per filter.
struct FeatureMatrix {
  RowMatrix frames;

  std::size_t num_frames() const { return static_cast<std::size_t>(frames.rows()); }
  std::size_t num_features() const { return static_cast<std::size_t>(frames.cols()); }
};

double hz_to_mel(double hz);
double mel_to_hz(double mel);

// n_filters x (n_fft/2 + 1) triangular filters, equally spaced on the mel
// scale between fmin and fmax. Triangles are linear in mel.
RowMatrix mel_filterbank(const FbankConfig& config);

// Log mel energies of every full window in `audio`.
FeatureMatrix compute_fbank(std::span<const double> audio, const FbankConfig& config);

// Single frame `t` of compute_fbank, for on-demand streaming. Identical
// arithmetic to the batch path.
Eigen::VectorXd compute_fbank_frame(std::span<const double> audio, std::size_t t,
                                    const FbankConfig& config, const RowMatrix& filterbank);

// Per-feature statistics for global normalization: x' = (x - mean) * inv_std.
struct FeatureStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd inv_std;

  bool empty() const { return mean.size() == 0; }
};

FeatureStats compute_feature_stats(std::span<const FeatureMatrix* const> matrices);

}  // namespace spikekws
