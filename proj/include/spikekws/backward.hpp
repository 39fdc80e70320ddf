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

#include "spikekws/features.hpp"
#include "spikekws/losses.hpp"
#include "spikekws/snn.hpp"

namespace spikekws {

struct BackwardOptions {
  // Boxcar surrogate: dS/dU = 1/width where |U - v_th| <= width/2, else 0.
  double surrogate_width = 1.0;
  CumulativeScoring scoring = CumulativeScoring::kResoftmax;
  // Weight of sum over layers of (mean layer firing rate)^2; 0 disables it.
  double spike_rate_penalty = 0.0;
  double loss_scale = 1.0;
  // Treat spikes as constants (dS/dU = 0). Gives the exact derivative of the
  // true forward wherever no spike flips; used by gradient checks.
  bool hold_spikes = false;
};

struct BackwardResult {
  double loss = 0.0;
  Parameters grads;
  ReadoutTrace trace;
};

// Reverse-mode gradients through the unrolled dynamics. The reset term
// -v_th*S[t-1] is treated as a constant. Throws Error naming the layer and
// timestep when a non-finite value appears.
BackwardResult backward(const Network& net, const FeatureMatrix& features, std::size_t label, LossKind loss,
                        const BackwardOptions& options = {});

}  // namespace spikekws
