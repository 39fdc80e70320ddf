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

#include "spikekws/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <fftw3.h>

#include "spikekws/error.hpp"

namespace spikekws {
namespace {

// FFTW planning is not thread-safe but executing a plan on fresh arrays is,
// so plans are created once per size under a lock and shared.
fftw_plan r2c_plan(int n_fft) {
  static std::mutex mu;
  static std::map<int, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto it = plans.find(n_fft);
  if (it != plans.end()) return it->second;
  std::vector<double> in(static_cast<std::size_t>(n_fft));
  std::vector<fftw_complex> out(static_cast<std::size_t>(n_fft / 2 + 1));
  fftw_plan plan = fftw_plan_dft_r2c_1d(n_fft, in.data(), out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (plan == nullptr) throw Error("fbank: FFTW could not plan a transform of size " + std::to_string(n_fft));
  plans.emplace(n_fft, plan);
  return plan;
}

std::vector<double> hamming(int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
  }
  return w;
}

Eigen::VectorXd frame_features(std::span<const double> audio, std::size_t t, const FbankConfig& config,
                               const RowMatrix& filterbank, const std::vector<double>& window,
                               fftw_plan plan) {
  const auto n_fft = static_cast<std::size_t>(config.n_fft);
  const auto win = static_cast<std::size_t>(config.window_len);
  const std::size_t start = t * static_cast<std::size_t>(config.hop_len);
  std::vector<double> buf(n_fft, 0.0);
  for (std::size_t i = 0; i < win; ++i) buf[i] = audio[start + i] * window[i];
  std::vector<fftw_complex> spec(config.num_bins());
  fftw_execute_dft_r2c(plan, buf.data(), spec.data());
  Eigen::VectorXd power(static_cast<Eigen::Index>(spec.size()));
  for (std::size_t k = 0; k < spec.size(); ++k) {
    power[static_cast<Eigen::Index>(k)] = spec[k][0] * spec[k][0] + spec[k][1] * spec[k][1];
  }
  Eigen::VectorXd mel = filterbank * power;
  for (Eigen::Index m = 0; m < mel.size(); ++m) mel[m] = std::log(std::max(mel[m], config.log_floor));
  return mel;
}

void check_audio(std::span<const double> audio, const FbankConfig& config) {
  if (audio.size() < static_cast<std::size_t>(config.window_len)) {
    throw Error("fbank: audio has " + std::to_string(audio.size()) + " samples, shorter than one window (" +
                std::to_string(config.window_len) + ")");
  }
  for (std::size_t i = 0; i < audio.size(); ++i) {
    if (!std::isfinite(audio[i])) throw Error("fbank: non-finite sample at index " + std::to_string(i));
  }
}

}  // namespace

void FbankConfig::validate() const {
  if (sample_rate <= 0) throw Error("fbank: sample_rate must be positive");
  if (window_len < 1 || hop_len < 1) throw Error("fbank: window_len and hop_len must be >= 1");
  if (n_fft < 2) throw Error("fbank: n_fft must be >= 2");
  if (window_len > n_fft) throw Error("fbank: window_len exceeds n_fft");
  if (!(fmin >= 0.0 && fmin < fmax && fmax <= sample_rate / 2.0)) {
    throw Error("fbank: need 0 <= fmin < fmax <= sample_rate/2");
  }
  if (n_filters < 1) throw Error("fbank: n_filters must be >= 1");
  if (!(log_floor > 0.0)) throw Error("fbank: log_floor must be positive");
}

std::size_t FbankConfig::num_frames(std::size_t num_samples) const {
  const auto win = static_cast<std::size_t>(window_len);
  if (num_samples < win) return 0;
  return 1 + (num_samples - win) / static_cast<std::size_t>(hop_len);
}

double hz_to_mel(double hz) { return 1127.0 * std::log1p(hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * std::expm1(mel / 1127.0); }

RowMatrix mel_filterbank(const FbankConfig& config) {
  config.validate();
  const std::size_t bins = config.num_bins();
  const double bin_hz = static_cast<double>(config.sample_rate) / config.n_fft;

  std::size_t in_range = 0;
  for (std::size_t k = 0; k < bins; ++k) {
    const double f = bin_hz * static_cast<double>(k);
    if (f >= config.fmin && f <= config.fmax) ++in_range;
  }
  if (static_cast<std::size_t>(config.n_filters) > in_range) {
    throw Error("fbank: " + std::to_string(config.n_filters) + " filters requested but only " +
                std::to_string(in_range) + " FFT bins lie in [fmin, fmax]");
  }

  const double mel_lo = hz_to_mel(config.fmin);
  const double mel_hi = hz_to_mel(config.fmax);
  const double spacing = (mel_hi - mel_lo) / (config.n_filters + 1);

  RowMatrix fb = RowMatrix::Zero(config.n_filters, static_cast<Eigen::Index>(bins));
  for (int m = 0; m < config.n_filters; ++m) {
    const double left = mel_lo + m * spacing;
    const double center = left + spacing;
    const double right = center + spacing;
    for (std::size_t k = 0; k < bins; ++k) {
      const double mel = hz_to_mel(bin_hz * static_cast<double>(k));
      if (mel <= left || mel >= right) continue;
      fb(m, static_cast<Eigen::Index>(k)) = mel <= center ? (mel - left) / (center - left) : (right - mel) / (right - center);
    }
    if (!(fb.row(m).sum() > 0.0)) {
      throw Error("fbank: filter " + std::to_string(m) + " covers no FFT bin; reduce n_filters or raise n_fft");
    }
  }
  return fb;
}

FeatureMatrix compute_fbank(std::span<const double> audio, const FbankConfig& config) {
  config.validate();
  check_audio(audio, config);
  const RowMatrix fb = mel_filterbank(config);
  const auto window = hamming(config.window_len);
  const fftw_plan plan = r2c_plan(config.n_fft);
  const std::size_t frames = config.num_frames(audio.size());
  FeatureMatrix out;
  out.frames.resize(static_cast<Eigen::Index>(frames), config.n_filters);
  for (std::size_t t = 0; t < frames; ++t) {
    out.frames.row(static_cast<Eigen::Index>(t)) = frame_features(audio, t, config, fb, window, plan).transpose();
  }
  return out;
}

Eigen::VectorXd compute_fbank_frame(std::span<const double> audio, std::size_t t, const FbankConfig& config,
                                    const RowMatrix& filterbank) {
  const std::size_t frames = config.num_frames(audio.size());
  if (t >= frames) {
    throw Error("fbank: frame " + std::to_string(t) + " out of range (" + std::to_string(frames) + " frames)");
  }
  const std::size_t start = t * static_cast<std::size_t>(config.hop_len);
  for (std::size_t i = start; i < start + static_cast<std::size_t>(config.window_len); ++i) {
    if (!std::isfinite(audio[i])) throw Error("fbank: non-finite sample at index " + std::to_string(i));
  }
  return frame_features(audio, t, config, filterbank, hamming(config.window_len), r2c_plan(config.n_fft));
}

FeatureStats compute_feature_stats(std::span<const FeatureMatrix* const> matrices) {
  if (matrices.empty()) throw Error("fbank: cannot compute statistics of zero feature matrices");
  const Eigen::Index width = matrices.front()->frames.cols();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(width);
  Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(width);
  double count = 0.0;
  for (const FeatureMatrix* m : matrices) {
    if (m->frames.cols() != width) throw Error("fbank: feature width mismatch while computing statistics");
    sum += m->frames.colwise().sum().transpose();
    sum_sq += m->frames.array().square().matrix().colwise().sum().transpose();
    count += static_cast<double>(m->frames.rows());
  }
  FeatureStats stats;
  stats.mean = sum / count;
  const Eigen::VectorXd var = (sum_sq / count - stats.mean.cwiseAbs2()).cwiseMax(0.0);
  stats.inv_std = (var.array() + 1e-8).rsqrt().matrix();
  return stats;
}

}  // namespace spikekws
