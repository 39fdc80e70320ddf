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

#include "spikekws/snn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "spikekws/error.hpp"
#include "spikekws/rng.hpp"

namespace spikekws {
namespace {

void check_finite(const Eigen::VectorXd& v, const char* what) {
  if (!v.allFinite()) throw Error(std::string("snn: non-finite ") + what);
}

void check_size(const Eigen::VectorXd& v, Eigen::Index n, const char* what) {
  if (v.size() != n) {
    throw Error(std::string("snn: ") + what + " has length " + std::to_string(v.size()) + ", expected " +
                std::to_string(n));
  }
}

Eigen::VectorXd uniform_vector(Rng& rng, Eigen::Index n, double lo, double hi) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(lo, hi);
  return v;
}

RowMatrix uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
  RowMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
  return m;
}

void clamp_vec(Eigen::VectorXd& v, double lo, double hi) { v = v.cwiseMax(lo).cwiseMin(hi); }

}  // namespace

void NetworkConfig::validate() const {
  if (n_inputs < 1) throw Error("network: n_inputs must be >= 1");
  if (hidden_sizes.empty()) throw Error("network: at least one hidden layer is required");
  for (std::size_t h : hidden_sizes) {
    if (h < 1) throw Error("network: hidden sizes must be >= 1");
  }
  if (n_classes < 1) throw Error("network: n_classes must be >= 1");
  if (!(readout_decay > 0.0 && readout_decay < 1.0)) throw Error("network: readout_decay must lie in (0, 1)");
}

Parameters Parameters::zeros_like() const {
  Parameters z = *this;
  z.visit([](const std::string&, double* data, std::size_t n) { std::fill(data, data + n, 0.0); });
  return z;
}

std::size_t Parameters::size() const {
  std::size_t total = 0;
  visit([&](const std::string&, const double*, std::size_t n) { total += n; });
  return total;
}

Network Network::init(const NetworkConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(seed);
  Network net;
  net.config = config;
  std::size_t fan_in = config.n_inputs;
  for (std::size_t width : config.hidden_sizes) {
    const auto n = static_cast<Eigen::Index>(width);
    AdLifParams layer;
    layer.weights = uniform_matrix(rng, n, static_cast<Eigen::Index>(fan_in));
    layer.gain = Eigen::VectorXd::Ones(n);
    layer.shift = Eigen::VectorXd::Zero(n);
    layer.alpha = uniform_vector(rng, n, ParamRanges::kAlphaMin, ParamRanges::kAlphaMax);
    layer.beta = uniform_vector(rng, n, ParamRanges::kBetaMin, ParamRanges::kBetaMax);
    layer.a = uniform_vector(rng, n, ParamRanges::kAMin, ParamRanges::kAMax);
    layer.b = uniform_vector(rng, n, ParamRanges::kBMin, ParamRanges::kBMax);
    net.params.hidden.push_back(std::move(layer));
    fan_in = width;
  }
  const auto k = static_cast<Eigen::Index>(config.n_classes);
  net.params.readout.weights = uniform_matrix(rng, k, static_cast<Eigen::Index>(fan_in));
  net.params.readout.gain = Eigen::VectorXd::Ones(k);
  net.params.readout.shift = Eigen::VectorXd::Zero(k);
  net.params.readout.decay = Eigen::VectorXd::Constant(k, config.readout_decay);
  return net;
}

void Network::clamp() {
  for (auto& h : params.hidden) {
    clamp_vec(h.alpha, ParamRanges::kAlphaMin, ParamRanges::kAlphaMax);
    clamp_vec(h.beta, ParamRanges::kBetaMin, ParamRanges::kBetaMax);
    clamp_vec(h.a, ParamRanges::kAMin, ParamRanges::kAMax);
    clamp_vec(h.b, ParamRanges::kBMin, ParamRanges::kBMax);
  }
  clamp_vec(params.readout.decay, ParamRanges::kDecayMin, ParamRanges::kDecayMax);
}

std::size_t Network::num_hidden_neurons() const {
  std::size_t n = 0;
  for (std::size_t h : config.hidden_sizes) n += h;
  return n;
}

std::size_t parameter_count(const NetworkConfig& config) {
  std::size_t total = 0;
  std::size_t fan_in = config.n_inputs;
  for (std::size_t width : config.hidden_sizes) {
    total += width * (fan_in + 6);
    fan_in = width;
  }
  total += config.n_classes * (fan_in + 3);
  return total;
}

std::string format_thousands(std::size_t count) {
  const std::size_t hundredths = (count + 9) / 10;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%zu.%02zuK", hundredths / 100, hundredths % 100);
  return buf;
}

LayerState LayerState::zeros(std::size_t n) {
  const auto m = static_cast<Eigen::Index>(n);
  return {Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m), Eigen::VectorXd::Zero(m)};
}

LayerState adlif_step(const LayerState& prev, const Eigen::VectorXd& weighted_input, const AdLifParams& params,
                      double v_th) {
  const Eigen::Index n = params.alpha.size();
  check_size(weighted_input, n, "weighted input");
  check_size(prev.u_mem, n, "membrane state");
  check_size(prev.spikes, n, "spike state");
  check_finite(weighted_input, "weighted input");
  check_finite(prev.u_mem, "membrane state");

  LayerState next;
  next.i_syn.resize(n);
  next.u_mem.resize(n);
  next.spikes.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double u = prev.u_mem[j];
    const double s = prev.spikes[j];
    const double i_syn = params.beta[j] * weighted_input[j] + params.a[j] * u + params.b[j] * s;
    const double u_new = params.alpha[j] * (u - v_th * s) + i_syn;
    next.i_syn[j] = i_syn;
    next.u_mem[j] = u_new;
    next.spikes[j] = u_new >= v_th ? 1.0 : 0.0;
  }
  return next;
}

Eigen::VectorXd readout_step(const Eigen::VectorXd& u_prev, const Eigen::VectorXd& weighted_input,
                             const Eigen::VectorXd& decay) {
  check_size(weighted_input, u_prev.size(), "readout input");
  check_size(decay, u_prev.size(), "readout decay");
  check_finite(weighted_input, "readout input");
  check_finite(u_prev, "readout state");
  return decay.cwiseProduct(u_prev) + weighted_input;
}

Eigen::VectorXd readout_step(const Eigen::VectorXd& u_prev, const Eigen::VectorXd& weighted_input, double decay) {
  return readout_step(u_prev, weighted_input, Eigen::VectorXd::Constant(u_prev.size(), decay));
}

StreamingState::StreamingState(const Network& net) : net_(&net) {
  const auto& hidden = net.params.hidden;
  layers_.resize(hidden.size());
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    layers_[l].input = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(hidden[l].fan_in()));
    layers_[l].state = LayerState::zeros(hidden[l].width());
  }
  const auto k = net.params.readout.weights.rows();
  u_r_ = Eigen::VectorXd::Zero(k);
  readout_z_ = Eigen::VectorXd::Zero(k);
  counts_.assign(hidden.size(), 0);
}

const Eigen::VectorXd& StreamingState::step(std::span<const double> frame) {
  const Network& net = *net_;
  const auto& hidden = net.params.hidden;
  const auto width = static_cast<std::size_t>(hidden.front().fan_in());
  if (frame.size() != width) {
    throw Error("snn: frame has " + std::to_string(frame.size()) + " features, network expects " +
                std::to_string(width));
  }
  frame_ = Eigen::Map<const Eigen::VectorXd>(frame.data(), static_cast<Eigen::Index>(frame.size()));
  if (!net.input_norm.empty()) frame_ = (frame_ - net.input_norm.mean).cwiseProduct(net.input_norm.inv_std);
  if (!frame_.allFinite()) throw Error("snn: non-finite input frame at step " + std::to_string(steps_));

  // Top-down so layer l still sees the spikes layer l-1 emitted last step.
  for (std::size_t l = layers_.size(); l-- > 0;) {
    Layer& layer = layers_[l];
    const AdLifParams& p = hidden[l];
    layer.input = l == 0 ? frame_ : layers_[l - 1].state.spikes;
    layer.z.noalias() = p.weights * layer.input;
    layer.x = p.gain.cwiseProduct(layer.z) + p.shift;
    if (!layer.x.allFinite()) {
      throw Error("snn: non-finite drive in layer " + std::to_string(l) + " at step " + std::to_string(steps_));
    }
    layer.state = adlif_step(layer.state, layer.x, p, net.v_th);
    if (!layer.state.u_mem.allFinite()) {
      throw Error("snn: non-finite membrane potential in layer " + std::to_string(l) + " at step " +
                  std::to_string(steps_));
    }
    counts_[l] = static_cast<int>(layer.state.spikes.sum());
  }
  const ReadoutParams& r = net.params.readout;
  readout_z_.noalias() = r.weights * layers_.back().state.spikes;
  u_r_ = readout_step(u_r_, r.gain.cwiseProduct(readout_z_) + r.shift, r.decay);
  if (!u_r_.allFinite()) throw Error("snn: non-finite readout potential at step " + std::to_string(steps_));
  ++steps_;
  return u_r_;
}

ReadoutTrace forward(const Network& net, const FeatureMatrix& features) {
  if (features.num_features() != net.config.n_inputs) {
    throw Error("snn: features have width " + std::to_string(features.num_features()) + ", network expects " +
                std::to_string(net.config.n_inputs));
  }
  const std::size_t steps = features.num_frames();
  const std::size_t layers = net.params.hidden.size();
  ReadoutTrace trace;
  trace.u_r.resize(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(net.config.n_classes));
  trace.spike_counts.assign(layers, std::vector<int>(steps, 0));
  StreamingState state(net);
  for (std::size_t t = 0; t < steps; ++t) {
    const auto row = features.frames.row(static_cast<Eigen::Index>(t));
    trace.u_r.row(static_cast<Eigen::Index>(t)) =
        state.step(std::span<const double>(row.data(), static_cast<std::size_t>(row.size()))).transpose();
    for (std::size_t l = 0; l < layers; ++l) trace.spike_counts[l][t] = state.spike_counts()[l];
  }
  return trace;
}

}  // namespace spikekws
