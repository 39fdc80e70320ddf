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
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "spikekws/features.hpp"

namespace spikekws {

struct NetworkConfig {
  std::size_t n_inputs = 40;
  std::vector<std::size_t> hidden_sizes{128, 128};
  std::size_t n_classes = 35;
  double readout_decay = 0.9;  // initial per-class readout leak

  void validate() const;
  bool operator==(const NetworkConfig&) const = default;
};

// Clamp ranges for the trainable neuron constants. `a` and `b` enter the
// current directly (I = beta*x + a*U + b*S), so they are kept non-positive:
// alpha + a stays inside (-1, 1) and the membrane recursion cannot diverge.
struct ParamRanges {
  static constexpr double kAlphaMin = 0.36, kAlphaMax = 0.96;
  static constexpr double kBetaMin = 0.36, kBetaMax = 0.96;
  static constexpr double kAMin = -1.0, kAMax = 0.0;
  static constexpr double kBMin = -2.0, kBMax = 0.0;
  static constexpr double kDecayMin = 0.36, kDecayMax = 0.96;
};

// One adaptive-LIF layer. The synaptic drive is x = gain * (W s) + shift;
// gain and shift are the affine half of a normalization layer and default
// to the identity.
struct AdLifParams {
  RowMatrix weights;  // n_out x n_in
  Eigen::VectorXd gain;
  Eigen::VectorXd shift;
  Eigen::VectorXd alpha;
  Eigen::VectorXd beta;
  Eigen::VectorXd a;
  Eigen::VectorXd b;

  std::size_t width() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t fan_in() const { return static_cast<std::size_t>(weights.cols()); }
};

// Non-spiking leaky integrator over the last hidden layer's spikes.
struct ReadoutParams {
  RowMatrix weights;  // n_classes x last hidden width
  Eigen::VectorXd gain;
  Eigen::VectorXd shift;
  Eigen::VectorXd decay;
};

// All trainable tensors. Gradients and optimizer moments reuse this shape.
struct Parameters {
  std::vector<AdLifParams> hidden;
  ReadoutParams readout;

  // Calls fn(name, data, size) for every trainable tensor in a fixed order.
  template <typename Fn>
  void visit(Fn&& fn) {
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      const std::string p = "hidden" + std::to_string(l) + ".";
      auto& h = hidden[l];
      fn(p + "weights", h.weights.data(), static_cast<std::size_t>(h.weights.size()));
      fn(p + "gain", h.gain.data(), static_cast<std::size_t>(h.gain.size()));
      fn(p + "shift", h.shift.data(), static_cast<std::size_t>(h.shift.size()));
      fn(p + "alpha", h.alpha.data(), static_cast<std::size_t>(h.alpha.size()));
      fn(p + "beta", h.beta.data(), static_cast<std::size_t>(h.beta.size()));
      fn(p + "a", h.a.data(), static_cast<std::size_t>(h.a.size()));
      fn(p + "b", h.b.data(), static_cast<std::size_t>(h.b.size()));
    }
    fn("readout.weights", readout.weights.data(), static_cast<std::size_t>(readout.weights.size()));
    fn("readout.gain", readout.gain.data(), static_cast<std::size_t>(readout.gain.size()));
    fn("readout.shift", readout.shift.data(), static_cast<std::size_t>(readout.shift.size()));
    fn("readout.decay", readout.decay.data(), static_cast<std::size_t>(readout.decay.size()));
  }

  template <typename Fn>
  void visit(Fn&& fn) const {
    const_cast<Parameters*>(this)->visit([&](const std::string& name, double* data, std::size_t n) {
      fn(name, static_cast<const double*>(data), n);
    });
  }

  Parameters zeros_like() const;
  std::size_t size() const;
};

struct Network {
  NetworkConfig config;
  double v_th = 1.0;
  Parameters params;
  FeatureStats input_norm;  // empty means raw features

  // Uniform +-1/sqrt(fan_in) weights, neuron constants uniform over their
  // clamp ranges, identity gain/shift, readout decay from the config.
  static Network init(const NetworkConfig& config, std::uint64_t seed);

  // Projects every constrained tensor back onto its ParamRanges interval.
  void clamp();

  std::size_t num_hidden_neurons() const;
};

// Trainable parameter total for a configuration: per hidden neuron fan_in
// weights plus gain, shift, alpha, beta, a, b; per class fan_in weights
// plus gain, shift, decay.
std::size_t parameter_count(const NetworkConfig& config);

// "27.63K" style rendering: thousands with two decimals, rounded up.
std::string format_thousands(std::size_t count);

struct LayerState {
  Eigen::VectorXd i_syn;
  Eigen::VectorXd u_mem;
  Eigen::VectorXd spikes;

  static LayerState zeros(std::size_t n);
};

// One timestep of the adaptive LIF recursion:
//   I[t] = beta*x + a*U[t-1] + b*S[t-1]
//   U[t] = alpha*(U[t-1] - v_th*S[t-1]) + I[t]
//   S[t] = U[t] >= v_th
LayerState adlif_step(const LayerState& prev, const Eigen::VectorXd& weighted_input, const AdLifParams& params,
                      double v_th);

// U_R[t] = decay*U_R[t-1] + x. Never spikes or resets.
Eigen::VectorXd readout_step(const Eigen::VectorXd& u_prev, const Eigen::VectorXd& weighted_input,
                             const Eigen::VectorXd& decay);
Eigen::VectorXd readout_step(const Eigen::VectorXd& u_prev, const Eigen::VectorXd& weighted_input, double decay);

struct ReadoutTrace {
  RowMatrix u_r;                               // T x K
  std::vector<std::vector<int>> spike_counts;  // [layer][t]

  std::size_t num_steps() const { return static_cast<std::size_t>(u_r.rows()); }
};

// Frame-at-a-time network evaluation. Layer l > 0 reads the spikes layer
// l-1 emitted on the previous step; the first layer reads the current
// frame; the readout reads the last layer's spikes of the current step.
class StreamingState {
 public:
  explicit StreamingState(const Network& net);

  // Consumes one feature frame and returns U_R for this step.
  const Eigen::VectorXd& step(std::span<const double> frame);

  std::size_t steps_taken() const { return steps_; }
  std::size_t num_layers() const { return layers_.size(); }
  const LayerState& layer_state(std::size_t l) const { return layers_[l].state; }
  // W * input before gain/shift, and the drive x after them.
  const Eigen::VectorXd& layer_projection(std::size_t l) const { return layers_[l].z; }
  const Eigen::VectorXd& layer_drive(std::size_t l) const { return layers_[l].x; }
  const Eigen::VectorXd& layer_input(std::size_t l) const { return layers_[l].input; }
  const Eigen::VectorXd& readout_projection() const { return readout_z_; }
  const Eigen::VectorXd& readout() const { return u_r_; }
  // Spikes emitted by each layer on the most recent step.
  const std::vector<int>& spike_counts() const { return counts_; }

 private:
  struct Layer {
    Eigen::VectorXd input;
    Eigen::VectorXd z;
    Eigen::VectorXd x;
    LayerState state;
  };

  const Network* net_;
  std::vector<Layer> layers_;
  Eigen::VectorXd frame_;
  Eigen::VectorXd readout_z_;
  Eigen::VectorXd u_r_;
  std::vector<int> counts_;
  std::size_t steps_ = 0;
};

// Runs every frame through a fresh StreamingState.
ReadoutTrace forward(const Network& net, const FeatureMatrix& features);

}  // namespace spikekws
