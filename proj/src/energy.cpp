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

#include "spikekws/energy.hpp"

#include "spikekws/error.hpp"

namespace spikekws {
namespace {

std::size_t record_length(const NetworkConfig& config, const std::vector<std::vector<int>>& spike_counts) {
  if (spike_counts.size() != config.hidden_sizes.size()) {
    throw Error("energy: spike record has " + std::to_string(spike_counts.size()) + " layers, network has " +
                std::to_string(config.hidden_sizes.size()));
  }
  const std::size_t steps = spike_counts.front().size();
  for (const auto& layer : spike_counts) {
    if (layer.size() != steps) throw Error("energy: spike record layers differ in length");
    for (int c : layer) {
      if (c < 0) throw Error("energy: negative spike count");
    }
  }
  return steps;
}

}  // namespace

void EnergyModel::validate() const {
  if (!(e_mac > 0.0 && e_acc > 0.0)) throw Error("energy: e_mac and e_acc must be positive");
}

OpCount count_ops_range(const NetworkConfig& config, const std::vector<std::vector<int>>& spike_counts,
                        std::size_t t_begin, std::size_t t_end) {
  const std::size_t steps = record_length(config, spike_counts);
  if (t_begin > t_end || t_end > steps) {
    throw Error("energy: range [" + std::to_string(t_begin) + ", " + std::to_string(t_end) +
                ") outside a record of " + std::to_string(steps) + " steps");
  }
  const auto& hidden = config.hidden_sizes;
  const std::size_t layers = hidden.size();
  std::uint64_t neurons = 0;
  for (std::size_t h : hidden) neurons += h;
  const std::uint64_t k = config.n_classes;
  const std::uint64_t dense_macs = config.n_inputs * hidden.front() + 2 * neurons + k;

  OpCount out;
  out.t_stop = t_end;
  for (std::size_t t = t_begin; t < t_end; ++t) {
    out.n_mac += dense_macs;
    out.n_acc += neurons;
    if (t > 0) {
      for (std::size_t l = 0; l < layers; ++l) {
        const auto prev = static_cast<std::uint64_t>(spike_counts[l][t - 1]);
        out.n_acc += prev;
        if (l + 1 < layers) out.n_acc += prev * hidden[l + 1];
      }
    }
    out.n_acc += static_cast<std::uint64_t>(spike_counts[layers - 1][t]) * k;
  }
  return out;
}

OpCount count_ops(const NetworkConfig& config, const std::vector<std::vector<int>>& spike_counts,
                  std::size_t t_stop) {
  return count_ops_range(config, spike_counts, 0, t_stop);
}

double estimate_energy(const OpCount& count, const EnergyModel& model) {
  return static_cast<double>(count.n_mac) * model.e_mac + static_cast<double>(count.n_acc) * model.e_acc;
}

std::vector<double> spike_rate_trace(const NetworkConfig& config,
                                     const std::vector<std::vector<int>>& spike_counts) {
  const std::size_t steps = record_length(config, spike_counts);
  if (steps == 0) throw Error("energy: empty spike record");
  double neurons = 0.0;
  for (std::size_t h : config.hidden_sizes) neurons += static_cast<double>(h);
  std::vector<double> rate(steps, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    double total = 0.0;
    for (const auto& layer : spike_counts) total += layer[t];
    rate[t] = total / neurons;
  }
  return rate;
}

}  // namespace spikekws
