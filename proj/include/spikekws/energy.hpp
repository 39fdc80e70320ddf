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
#include <vector>

#include "spikekws/snn.hpp"

namespace spikekws {

// Per-operation energy at 45 nm.
struct EnergyModel {
  double e_mac = 4.6e-12;  // J per multiply-accumulate
  double e_acc = 0.9e-12;  // J per accumulate

  void validate() const;
  bool operator==(const EnergyModel&) const = default;
};

// Version tag for the counting rules implemented by count_ops_range.
inline constexpr int kOpCountConvention = 1;

struct OpCount {
  std::uint64_t n_mac = 0;
  std::uint64_t n_acc = 0;
  std::size_t t_stop = 0;
};

// Counts synaptic and neuron-update operations for timesteps [t_begin,
// t_end) given per-layer spike totals spike_counts[layer][t]. Per step:
//   first layer:      n_inputs * h1 MACs (real-valued frames)
//   layer l > 0:      spikes(l-1, t-1) * h_l accumulates
//   hidden neurons:   2 MACs each (alpha*U, a*U), 1 accumulate each to merge
//                     the beta-scaled input, 1 accumulate per neuron that
//                     spiked at t-1 for b*S
//   readout:          K decay MACs, spikes(last, t) * K accumulates
OpCount count_ops_range(const NetworkConfig& config, const std::vector<std::vector<int>>& spike_counts,
                        std::size_t t_begin, std::size_t t_end);

// count_ops_range over [0, t_stop).
OpCount count_ops(const NetworkConfig& config, const std::vector<std::vector<int>>& spike_counts,
                  std::size_t t_stop);

double estimate_energy(const OpCount& count, const EnergyModel& model);

// rate[t] = spikes at t over all hidden layers / hidden neuron count.
std::vector<double> spike_rate_trace(const NetworkConfig& config,
                                     const std::vector<std::vector<int>>& spike_counts);

}  // namespace spikekws
