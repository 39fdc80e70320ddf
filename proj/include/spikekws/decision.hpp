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
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "spikekws/energy.hpp"
#include "spikekws/features.hpp"
#include "spikekws/snn.hpp"

namespace spikekws {

struct DecisionConfig {
  double threshold_c = 0.9;      // C in (0, 1]
  std::size_t min_timestep = 1;  // earliest step allowed to trigger

  void validate() const;
  bool operator==(const DecisionConfig&) const = default;
};

// CS_t = max(softmax(O[t])), clamped into [1/K, 1): a rounded value of
// exactly 1.0 is reported as the largest double below 1, so C = 1.0 can
// never trigger.
double confidence(const Eigen::VectorXd& o_t);

// First index of the largest component.
std::size_t argmax(const Eigen::VectorXd& v);

// Maps an annotated end time to the number of frames (1-based) that must be
// read before the end is covered. Frame n (1-based) covers audio up to
// ((n-1)*hop + window)/sample_rate. Clamped to [1, total_frames].
std::size_t end_time_to_frame(double t_end_seconds, const FbankConfig& features, std::size_t total_frames);

// Pull-based feature source for streaming decisions.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  // Fills `frame` with the next frame; false once exhausted.
  virtual bool next(Eigen::VectorXd& frame) = 0;
  // Number of frames the source can yield in total (T).
  virtual std::size_t total_frames() const = 0;
};

class MatrixFrameSource : public FrameSource {
 public:
  explicit MatrixFrameSource(const FeatureMatrix& features) : features_(&features) {}
  bool next(Eigen::VectorXd& frame) override;
  std::size_t total_frames() const override { return features_->num_frames(); }
  std::size_t frames_read() const { return pos_; }

 private:
  const FeatureMatrix* features_;
  std::size_t pos_ = 0;
};

// Computes fbank frames from PCM on demand; frames after the decision are
// never computed.
class AudioFrameSource : public FrameSource {
 public:
  AudioFrameSource(std::vector<double> audio, const FbankConfig& config);
  bool next(Eigen::VectorXd& frame) override;
  std::size_t total_frames() const override { return total_; }
  std::size_t frames_read() const { return pos_; }

 private:
  std::vector<double> audio_;
  FbankConfig config_;
  RowMatrix filterbank_;
  std::size_t total_ = 0;
  std::size_t pos_ = 0;
};

struct DecisionOutcome {
  std::size_t predicted = 0;
  std::size_t t_d = 0;  // frames consumed, 1-based
  std::size_t total_frames = 0;
  bool early = false;  // triggered with t_d < T
  std::vector<double> confidence_trace;          // CS_t for t = 1..t_d
  std::vector<std::vector<int>> spike_counts;    // [layer][t] for t < t_d
  std::vector<int> spike_counts_until_td;        // per-layer totals
};

// Feeds frames one at a time and stops at the first t >= min_timestep with
// CS_t >= C, or when the source runs dry.
DecisionOutcome decide_stream(const Network& net, FrameSource& source, const DecisionConfig& config);

// Whole-utterance record of one sample, from which the decision for any
// threshold can be read off without re-running the network.
struct SampleRun {
  std::size_t label = 0;
  std::vector<double> confidence;       // CS_t, t = 1..T
  std::vector<std::size_t> prediction;  // argmax O[t], t = 1..T
  std::vector<std::vector<int>> spike_counts;
  std::optional<std::size_t> t_end_frame;
};

SampleRun run_sample(const Network& net, const FeatureMatrix& features, std::size_t label,
                     std::optional<std::size_t> t_end_frame = std::nullopt);

// Decision step for a recorded run (1-based, same rule as decide_stream).
std::size_t decision_step(const SampleRun& run, const DecisionConfig& config);

struct EvalReport {
  double threshold_c = 0.0;
  std::size_t n_samples = 0;
  double acc_early = 0.0;  // percent
  double acc_late = 0.0;   // percent
  double mean_td = 0.0;    // timesteps
  std::optional<double> delta_td;
  double mean_spike_rate = 0.0;  // over the full run
  double mean_energy = 0.0;      // J, stopping at t_d
  double mean_energy_late = 0.0; // J, running to T
  double energy_ratio = 0.0;     // mean over samples of E(t_d)/E(T)
};

// Acc^t, Acc^T, mean t_d, delta t_d over samples with t_end, R^T and energy.
// Samples that never trigger are decided at T and count toward Acc^t.
EvalReport summarize(const NetworkConfig& config, std::span<const SampleRun> runs, const DecisionConfig& decision,
                     const EnergyModel& energy = {});

struct EvalInput {
  const FeatureMatrix* features = nullptr;
  std::size_t label = 0;
  std::optional<std::size_t> t_end_frame;
};

std::vector<SampleRun> run_all(const Network& net, std::span<const EvalInput> inputs, std::size_t threads);

EvalReport evaluate(const Network& net, std::span<const EvalInput> inputs, const DecisionConfig& decision,
                    const EnergyModel& energy = {}, std::size_t threads = 1);

// Default grid {0.50, 0.55, ..., 0.95, 0.99}.
std::vector<double> default_threshold_grid();

struct SweepResult {
  std::vector<EvalReport> rows;
  std::size_t selected = 0;
};

// Picks the C with the highest Acc^t; ties go to the smaller mean t_d, then
// to the smaller C.
SweepResult sweep_threshold(const NetworkConfig& config, std::span<const SampleRun> runs,
                            std::span<const double> grid, std::size_t min_timestep, const EnergyModel& energy = {});

}  // namespace spikekws
