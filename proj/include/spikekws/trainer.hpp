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
#include <functional>
#include <span>
#include <vector>

#include "spikekws/backward.hpp"
#include "spikekws/decision.hpp"
#include "spikekws/features.hpp"
#include "spikekws/losses.hpp"
#include "spikekws/snn.hpp"

namespace spikekws {

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 128;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
  double surrogate_width = 1.0;
  LossKind loss = LossKind::kCt;
  CumulativeScoring scoring = CumulativeScoring::kResoftmax;
  double spike_rate_penalty = 0.0;
  bool balanced_sampling = false;
  std::size_t threads = 0;  // 0 = all cores
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-8;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

struct TrainExample {
  const FeatureMatrix* features = nullptr;
  std::size_t label = 0;
};

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_acc_late = 0.0;   // percent; 0 without a validation set
  double val_acc_early = 0.0;  // percent, at the configured threshold
  double mean_spike_rate = 0.0;
};

struct BatchGradient {
  Parameters grads;  // mean over the batch
  double loss = 0.0;  // mean over the batch
  double spike_rate = 0.0;  // mean firing rate over the batch
};

// Mean gradient of a batch. Samples are reduced in fixed-size chunks whose
// partial sums are combined in order, so the result does not depend on the
// thread count.
BatchGradient batch_gradient(const Network& net, std::span<const TrainExample> batch, const TrainConfig& config);

// Adam with bias correction, followed by Network::clamp().
class AdamOptimizer {
 public:
  AdamOptimizer(const Parameters& shape, const TrainConfig& config);
  void step(Network& net, const Parameters& grads);

 private:
  Parameters m_;
  Parameters v_;
  double beta1_, beta2_, eps_, lr_;
  std::size_t t_ = 0;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Mini-batch training. With balanced_sampling each epoch draws
// train_set.size() samples class-uniformly; otherwise it is a seeded
// permutation. Throws Error naming the batch when the loss goes non-finite.
std::vector<EpochMetrics> train(Network& net, std::span<const TrainExample> train_set,
                                std::span<const TrainExample> val_set, const TrainConfig& config,
                                const DecisionConfig& decision, const EpochCallback& on_epoch = {});

}  // namespace spikekws
