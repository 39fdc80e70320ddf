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


#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spikekws/decision.hpp"
#include "spikekws/error.hpp"
#include "spikekws/losses.hpp"
#include "test_util.hpp"

namespace spikekws {
namespace {

TEST(Confidence, ClosedForms) {
  for (int k : {2, 3, 10, 35}) {
    EXPECT_EQ(confidence(Eigen::VectorXd::Constant(k, 4.0)), 1.0 / k);
  }
  const double e = std::numbers::e;
  EXPECT_NEAR(confidence(Eigen::Vector3d(1.0, 0.0, 0.0)), e / (e + 2.0), 1e-15);
  EXPECT_NEAR(e / (e + 2.0), 0.576, 5e-4);
  double prev = 0.0;
  for (int t = 0; t < 10; ++t) {
    const double cs = confidence(Eigen::Vector3d(t + 1.0, 0.0, 0.0));
    EXPECT_GT(cs, prev);
    EXPECT_LT(cs, 1.0);
    prev = cs;
  }
  EXPECT_LT(confidence(Eigen::Vector2d(1000.0, 0.0)), 1.0);
}

TEST(Confidence, ShiftInvariantAndBounded) {
  Rng rng(51);
  for (int i = 0; i < 200; ++i) {
    const std::size_t k = 2 + rng.below(6);
    Eigen::VectorXd o(k);
    for (std::size_t c = 0; c < k; ++c) o[c] = rng.uniform(0.0, 5.0);
    const double cs = confidence(o);
    EXPECT_NEAR(confidence((o.array() + rng.uniform(-50.0, 50.0)).matrix()), cs, 1e-14);
    EXPECT_GE(cs, 1.0 / static_cast<double>(k) - 1e-15);
    EXPECT_LT(cs, 1.0);
  }
  EXPECT_THROW(confidence(Eigen::VectorXd()), Error);
  EXPECT_THROW(confidence(Eigen::Vector2d(std::nan(""), 0.0)), Error);
}

TEST(Argmax, FirstMaximumWins) {
  EXPECT_EQ(argmax(Eigen::Vector3d(1.0, 3.0, 3.0)), 1u);
  EXPECT_EQ(argmax(Eigen::Vector3d(5.0, 3.0, 5.0)), 0u);
}

// Smallest 1-based frame whose window covers t_end, clamped to [1, T].
std::size_t frame_by_scan(double t_end, const FbankConfig& f, std::size_t total) {
  for (std::size_t t = 1; t <= total; ++t) {
    if (static_cast<double>((t - 1) * f.hop_len + f.window_len) >= t_end * f.sample_rate - 1e-9) return t;
  }
  return total;
}

TEST(EndTime, MapsSecondsToFrames) {
  FbankConfig f;
  EXPECT_EQ(end_time_to_frame(1.0, f, 98), 98u);
  EXPECT_EQ(end_time_to_frame(0.0, f, 98), 1u);
  EXPECT_EQ(end_time_to_frame(0.025, f, 98), 1u);
  EXPECT_EQ(end_time_to_frame(0.026, f, 98), 2u);
  for (int i = 0; i <= 1000; ++i) {
    const double t = i / 1000.0;
    EXPECT_EQ(end_time_to_frame(t, f, 98), frame_by_scan(t, f, 98)) << t;
  }
}

struct Fixture {
  NetworkConfig cfg{5, {16, 12}, 4, 0.9};
  Network net = Network::init(cfg, 61);
  std::vector<FeatureMatrix> feats;
  Fixture() {
    Rng rng(62);
    for (int i = 0; i < 12; ++i) feats.push_back(testing_util::random_features(40, 5, rng, 0.0, 3.5));
  }
};

TEST(DecideStream, UnreachableThresholdRunsToEnd) {
  Fixture fx;
  for (const auto& f : fx.feats) {
    MatrixFrameSource src(f);
    const DecisionOutcome d = decide_stream(fx.net, src, DecisionConfig{1.0, 1});
    EXPECT_EQ(d.t_d, 40u);
    EXPECT_FALSE(d.early);
    EXPECT_EQ(src.frames_read(), 40u);
    const RowMatrix o = cumulative_output(forward(fx.net, f)).o;
    EXPECT_EQ(d.predicted, argmax(o.row(39).transpose()));
    EXPECT_EQ(d.confidence_trace.back(), confidence(o.row(39).transpose()));
  }
}

TEST(DecideStream, FloorThresholdStopsAtFirstFrame) {
  Fixture fx;
  for (const auto& f : fx.feats) {
    MatrixFrameSource src(f);
    const DecisionOutcome d = decide_stream(fx.net, src, DecisionConfig{1.0 / 4.0, 1});
    EXPECT_EQ(d.t_d, 1u);
    EXPECT_EQ(src.frames_read(), 1u);
  }
}

TEST(DecideStream, ReadsExactlyTdFramesAndAgreesWithOffline) {
  Fixture fx;
  for (double c : {0.3, 0.5, 0.7, 0.9}) {
    for (std::size_t min_t : {1u, 5u}) {
      for (const auto& f : fx.feats) {
        MatrixFrameSource src(f);
        const DecisionConfig dc{c, min_t};
        const DecisionOutcome d = decide_stream(fx.net, src, dc);
        EXPECT_EQ(src.frames_read(), d.t_d);
        EXPECT_EQ(d.confidence_trace.size(), d.t_d);
        EXPECT_GE(d.t_d, min_t);
        const SampleRun run = run_sample(fx.net, f, 0);
        EXPECT_EQ(decision_step(run, dc), d.t_d);
        EXPECT_EQ(run.prediction[d.t_d - 1], d.predicted);
        EXPECT_EQ(d.early, d.t_d < 40);
        int total = 0;
        for (std::size_t t = 0; t < d.t_d; ++t) total += run.spike_counts[0][t];
        EXPECT_EQ(d.spike_counts_until_td[0], total);
      }
    }
  }
}

TEST(DecideStream, RaisingThresholdNeverDecidesEarlier) {
  Fixture fx;
  const auto grid = default_threshold_grid();
  for (const auto& f : fx.feats) {
    const SampleRun run = run_sample(fx.net, f, 0);
    std::size_t prev = 0;
    for (double c : grid) {
      const std::size_t td = decision_step(run, DecisionConfig{c, 1});
      EXPECT_GE(td, prev);
      prev = td;
    }
  }
}

TEST(DecideStream, AudioSourceComputesFramesLazily) {
  FbankConfig fc;
  Rng rng(63);
  std::vector<double> audio(16000);
  for (std::size_t i = 0; i < audio.size(); ++i) audio[i] = 0.3 * std::sin(0.05 * i) + rng.uniform(-0.05, 0.05);
  const FeatureMatrix full = compute_fbank(audio, fc);
  AudioFrameSource src(audio, fc);
  EXPECT_EQ(src.total_frames(), 98u);
  Eigen::VectorXd frame;
  for (Eigen::Index t = 0; t < 3; ++t) {
    ASSERT_TRUE(src.next(frame));
    EXPECT_EQ(frame.transpose(), full.frames.row(t));
  }
  EXPECT_EQ(src.frames_read(), 3u);
  const Network net = Network::init(NetworkConfig{40, {8}, 3, 0.9}, 1);
  AudioFrameSource a(audio, fc);
  MatrixFrameSource m(full);
  const DecisionOutcome da = decide_stream(net, a, DecisionConfig{1.0, 1});
  const DecisionOutcome dm = decide_stream(net, m, DecisionConfig{1.0, 1});
  EXPECT_EQ(da.confidence_trace, dm.confidence_trace);
}

TEST(DecideStream, RejectsEmptyAndWrongWidth) {
  Fixture fx;
  FeatureMatrix empty{RowMatrix::Zero(0, 5)};
  MatrixFrameSource src(empty);
  EXPECT_THROW(decide_stream(fx.net, src, DecisionConfig{}), Error);
  FeatureMatrix narrow{RowMatrix::Zero(3, 4)};
  MatrixFrameSource src2(narrow);
  EXPECT_THROW(decide_stream(fx.net, src2, DecisionConfig{}), Error);
  EXPECT_THROW((DecisionConfig{0.0, 1}).validate(), Error);
  EXPECT_THROW((DecisionConfig{1.1, 1}).validate(), Error);
  EXPECT_THROW((DecisionConfig{0.5, 0}).validate(), Error);
}

SampleRun handmade(std::size_t label, std::size_t steps, std::size_t fire_at, std::size_t early_pred,
                   std::size_t late_pred) {
  SampleRun r;
  r.label = label;
  r.confidence.assign(steps, 0.3);
  r.prediction.assign(steps, early_pred);
  r.confidence[fire_at - 1] = 0.95;
  r.prediction.back() = late_pred;
  r.spike_counts.assign(1, std::vector<int>(steps, 1));
  return r;
}

TEST(Summarize, SingletonBookkeeping) {
  const NetworkConfig cfg{2, {4}, 3, 0.9};
  std::vector<SampleRun> runs{handmade(2, 98, 50, 2, 2)};
  runs[0].t_end_frame = 60;
  const EvalReport r = summarize(cfg, runs, DecisionConfig{0.9, 1});
  EXPECT_EQ(r.acc_early, 100.0);
  EXPECT_EQ(r.mean_td, 50.0);
  ASSERT_TRUE(r.delta_td);
  EXPECT_EQ(*r.delta_td, -10.0);
  EXPECT_DOUBLE_EQ(r.mean_spike_rate, 0.25);
  EXPECT_NEAR(r.energy_ratio, r.mean_energy / r.mean_energy_late, 1e-15);
}

TEST(Summarize, NeverTriggeredCountsWithFinalOutput) {
  const NetworkConfig cfg{2, {4}, 3, 0.9};
  std::vector<SampleRun> runs{handmade(1, 20, 20, 0, 1), handmade(0, 20, 5, 0, 2)};
  runs[1].t_end_frame = 10;
  const EvalReport r = summarize(cfg, runs, DecisionConfig{0.9, 1});
  EXPECT_EQ(r.mean_td, 12.5);
  EXPECT_EQ(r.acc_early, 100.0);
  EXPECT_EQ(r.acc_late, 50.0);
  ASSERT_TRUE(r.delta_td);
  EXPECT_EQ(*r.delta_td, -5.0);
  const EvalReport late = summarize(cfg, runs, DecisionConfig{1.0, 1});
  EXPECT_EQ(late.acc_early, late.acc_late);
  EXPECT_EQ(late.mean_td, 20.0);
  EXPECT_DOUBLE_EQ(late.energy_ratio, 1.0);
  EXPECT_THROW(summarize(cfg, std::vector<SampleRun>{}, DecisionConfig{}), Error);
}

TEST(Sweep, PicksBestAccuracyThenEarliest) {
  const NetworkConfig cfg{2, {4}, 3, 0.9};
  auto mk = [](double cs_early, std::size_t pred_early) {
    SampleRun r;
    r.label = 0;
    r.confidence = {0.2, cs_early, 0.3, 0.99};
    r.prediction = {1, pred_early, 0, 0};
    r.spike_counts.assign(1, std::vector<int>(4, 0));
    return r;
  };
  // C <= 0.6 fires at t=2: one wrong; C in (0.6, 0.8] fires one sample early and right.
  std::vector<SampleRun> runs{mk(0.6, 1), mk(0.8, 0)};
  const std::vector<double> grid{0.5, 0.6, 0.7, 0.8, 0.9};
  const SweepResult s = sweep_threshold(cfg, runs, grid, 1);
  ASSERT_EQ(s.rows.size(), 5u);
  EXPECT_EQ(s.rows[0].acc_early, 50.0);
  EXPECT_EQ(s.rows[2].acc_early, 100.0);
  EXPECT_EQ(s.rows[4].acc_early, 100.0);
  EXPECT_EQ(s.selected, 2u);
  EXPECT_EQ(default_threshold_grid().size(), 11u);
  EXPECT_EQ(default_threshold_grid().back(), 0.99);
  EXPECT_EQ(default_threshold_grid().front(), 0.50);
}

TEST(Evaluate, ParallelMatchesSerial) {
  Fixture fx;
  std::vector<EvalInput> inputs;
  for (std::size_t i = 0; i < fx.feats.size(); ++i) inputs.push_back({&fx.feats[i], i % 4, 30});
  const EvalReport a = evaluate(fx.net, inputs, DecisionConfig{0.6, 1}, {}, 1);
  const EvalReport b = evaluate(fx.net, inputs, DecisionConfig{0.6, 1}, {}, 3);
  EXPECT_EQ(a.acc_early, b.acc_early);
  EXPECT_EQ(a.mean_td, b.mean_td);
  EXPECT_EQ(a.mean_energy, b.mean_energy);
  EXPECT_EQ(a.mean_spike_rate, b.mean_spike_rate);
}

}  // namespace
}  // namespace spikekws
