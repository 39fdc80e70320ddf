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

#include "spikekws/decision.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "spikekws/error.hpp"
#include "spikekws/losses.hpp"
#include "spikekws/parallel.hpp"

namespace spikekws {

void DecisionConfig::validate() const {
  if (!(threshold_c > 0.0 && threshold_c <= 1.0)) throw Error("decision: threshold_c must lie in (0, 1]");
  if (min_timestep < 1) throw Error("decision: min_timestep must be >= 1");
}

double confidence(const Eigen::VectorXd& o_t) {
  if (o_t.size() == 0) throw Error("decision: empty score vector");
  if (!o_t.allFinite()) throw Error("decision: non-finite score vector");
  const double m = o_t.maxCoeff();
  const double denom = (o_t.array() - m).exp().sum();
  return std::min(1.0 / denom, std::nextafter(1.0, 0.0));
}

std::size_t argmax(const Eigen::VectorXd& v) {
  std::size_t best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[static_cast<Eigen::Index>(best)]) best = static_cast<std::size_t>(i);
  }
  return best;
}

std::size_t end_time_to_frame(double t_end_seconds, const FbankConfig& features, std::size_t total_frames) {
  if (total_frames == 0) throw Error("decision: cannot map a timestamp onto zero frames");
  const double q = (t_end_seconds * features.sample_rate - features.window_len) / features.hop_len;
  const double n = std::ceil(q - 1e-9) + 1.0;
  if (n <= 1.0) return 1;
  if (n >= static_cast<double>(total_frames)) return total_frames;
  return static_cast<std::size_t>(n);
}

bool MatrixFrameSource::next(Eigen::VectorXd& frame) {
  if (pos_ >= features_->num_frames()) return false;
  frame = features_->frames.row(static_cast<Eigen::Index>(pos_)).transpose();
  ++pos_;
  return true;
}

AudioFrameSource::AudioFrameSource(std::vector<double> audio, const FbankConfig& config)
    : audio_(std::move(audio)), config_(config), filterbank_(mel_filterbank(config)) {
  total_ = config_.num_frames(audio_.size());
}

bool AudioFrameSource::next(Eigen::VectorXd& frame) {
  if (pos_ >= total_) return false;
  frame = compute_fbank_frame(audio_, pos_, config_, filterbank_);
  ++pos_;
  return true;
}

DecisionOutcome decide_stream(const Network& net, FrameSource& source, const DecisionConfig& config) {
  config.validate();
  StreamingState state(net);
  const std::size_t layers = net.params.hidden.size();
  DecisionOutcome out;
  out.total_frames = source.total_frames();
  out.spike_counts.assign(layers, {});
  out.spike_counts_until_td.assign(layers, 0);
  Eigen::VectorXd running = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.config.n_classes));
  Eigen::VectorXd frame;
  bool triggered = false;
  while (source.next(frame)) {
    const Eigen::VectorXd& u_r = state.step(std::span<const double>(frame.data(), static_cast<std::size_t>(frame.size())));
    running += softmax(u_r);
    const double cs = confidence(running);
    out.confidence_trace.push_back(cs);
    for (std::size_t l = 0; l < layers; ++l) {
      out.spike_counts[l].push_back(state.spike_counts()[l]);
      out.spike_counts_until_td[l] += state.spike_counts()[l];
    }
    if (state.steps_taken() >= config.min_timestep && cs >= config.threshold_c) {
      triggered = true;
      break;
    }
  }
  if (state.steps_taken() == 0) throw Error("decision: frame source yielded no frames");
  out.t_d = state.steps_taken();
  out.predicted = argmax(running);
  out.early = triggered && out.t_d < out.total_frames;
  return out;
}

SampleRun run_sample(const Network& net, const FeatureMatrix& features, std::size_t label,
                     std::optional<std::size_t> t_end_frame) {
  const ReadoutTrace trace = forward(net, features);
  const CumulativeOutput cum = cumulative_output(trace);
  SampleRun run;
  run.label = label;
  run.t_end_frame = t_end_frame;
  run.spike_counts = trace.spike_counts;
  const Eigen::Index steps = cum.o.rows();
  run.confidence.resize(static_cast<std::size_t>(steps));
  run.prediction.resize(static_cast<std::size_t>(steps));
  for (Eigen::Index t = 0; t < steps; ++t) {
    const Eigen::VectorXd o = cum.o.row(t).transpose();
    run.confidence[static_cast<std::size_t>(t)] = confidence(o);
    run.prediction[static_cast<std::size_t>(t)] = argmax(o);
  }
  return run;
}

std::size_t decision_step(const SampleRun& run, const DecisionConfig& config) {
  const std::size_t steps = run.confidence.size();
  if (steps == 0) throw Error("decision: empty run");
  for (std::size_t t = std::max<std::size_t>(config.min_timestep, 1); t <= steps; ++t) {
    if (run.confidence[t - 1] >= config.threshold_c) return t;
  }
  return steps;
}

EvalReport summarize(const NetworkConfig& config, std::span<const SampleRun> runs, const DecisionConfig& decision,
                     const EnergyModel& energy) {
  decision.validate();
  if (runs.empty()) throw Error("decision: cannot evaluate an empty dataset");
  double neurons = 0.0;
  for (std::size_t h : config.hidden_sizes) neurons += static_cast<double>(h);

  EvalReport r;
  r.threshold_c = decision.threshold_c;
  r.n_samples = runs.size();
  std::size_t correct_early = 0;
  std::size_t correct_late = 0;
  double td_sum = 0.0;
  double delta_sum = 0.0;
  std::size_t delta_n = 0;
  double spikes = 0.0;
  double neuron_steps = 0.0;
  double e_early = 0.0;
  double e_late = 0.0;
  double ratio = 0.0;
  for (const SampleRun& run : runs) {
    const std::size_t steps = run.confidence.size();
    const std::size_t td = decision_step(run, decision);
    correct_early += run.prediction[td - 1] == run.label;
    correct_late += run.prediction[steps - 1] == run.label;
    td_sum += static_cast<double>(td);
    if (run.t_end_frame) {
      delta_sum += static_cast<double>(td) - static_cast<double>(*run.t_end_frame);
      ++delta_n;
    }
    for (const auto& layer : run.spike_counts) {
      for (int c : layer) spikes += c;
    }
    neuron_steps += neurons * static_cast<double>(steps);
    const double early = estimate_energy(count_ops(config, run.spike_counts, td), energy);
    const double late = estimate_energy(count_ops(config, run.spike_counts, steps), energy);
    e_early += early;
    e_late += late;
    ratio += early / late;
  }
  const double n = static_cast<double>(runs.size());
  r.acc_early = 100.0 * static_cast<double>(correct_early) / n;
  r.acc_late = 100.0 * static_cast<double>(correct_late) / n;
  r.mean_td = td_sum / n;
  if (delta_n > 0) r.delta_td = delta_sum / static_cast<double>(delta_n);
  r.mean_spike_rate = spikes / neuron_steps;
  r.mean_energy = e_early / n;
  r.mean_energy_late = e_late / n;
  r.energy_ratio = ratio / n;
  return r;
}

std::vector<SampleRun> run_all(const Network& net, std::span<const EvalInput> inputs, std::size_t threads) {
  std::vector<SampleRun> runs(inputs.size());
  parallel_for(inputs.size(), threads, [&](std::size_t i) {
    runs[i] = run_sample(net, *inputs[i].features, inputs[i].label, inputs[i].t_end_frame);
  });
  return runs;
}

EvalReport evaluate(const Network& net, std::span<const EvalInput> inputs, const DecisionConfig& decision,
                    const EnergyModel& energy, std::size_t threads) {
  if (inputs.empty()) throw Error("decision: cannot evaluate an empty dataset");
  const auto runs = run_all(net, inputs, threads);
  return summarize(net.config, runs, decision, energy);
}

std::vector<double> default_threshold_grid() {
  return {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.99};
}

SweepResult sweep_threshold(const NetworkConfig& config, std::span<const SampleRun> runs,
                            std::span<const double> grid, std::size_t min_timestep, const EnergyModel& energy) {
  if (grid.empty()) throw Error("decision: empty threshold grid");
  SweepResult out;
  for (double c : grid) out.rows.push_back(summarize(config, runs, DecisionConfig{c, min_timestep}, energy));
  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const EvalReport& cand = out.rows[i];
    const EvalReport& best = out.rows[out.selected];
    if (cand.acc_early > best.acc_early || (cand.acc_early == best.acc_early && cand.mean_td < best.mean_td)) {
      out.selected = i;
    }
  }
  return out;
}

}  // namespace spikekws
