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
#include <string>

#include <Eigen/Dense>

#include "spikekws/features.hpp"
#include "spikekws/snn.hpp"

namespace spikekws {

enum class LossKind { kSpikeRate, kTet, kCumulative, kCt };

// How cross-entropy reads the cumulative score O[t], which is not a
// distribution. kResoftmax applies log-softmax to O[t]; kAverage treats
// O[t]/(t+1) as class probabilities.
enum class CumulativeScoring { kResoftmax, kAverage };

LossKind parse_loss_kind(const std::string& name);
std::string to_string(LossKind kind);
CumulativeScoring parse_cumulative_scoring(const std::string& name);
std::string to_string(CumulativeScoring scoring);

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits);

// O[t] = sum_{i<=t} softmax(U_R[i]), one row per timestep.
struct CumulativeOutput {
  RowMatrix o;
};

CumulativeOutput cumulative_output(const RowMatrix& u_r);
inline CumulativeOutput cumulative_output(const ReadoutTrace& trace) { return cumulative_output(trace.u_r); }

// Mean over timesteps of CE on O[t].
double ct_loss(const ReadoutTrace& trace, std::size_t label,
               CumulativeScoring scoring = CumulativeScoring::kResoftmax);
// CE of the time-averaged readout.
double spike_rate_loss(const ReadoutTrace& trace, std::size_t label);
// Mean over timesteps of CE on U_R[t].
double tet_loss(const ReadoutTrace& trace, std::size_t label);
// CE on O[T-1] only.
double cumulative_loss(const ReadoutTrace& trace, std::size_t label,
                       CumulativeScoring scoring = CumulativeScoring::kResoftmax);

struct LossGrad {
  double value = 0.0;
  RowMatrix d_u_r;  // dL/dU_R, T x K
};

LossGrad loss_with_grad(LossKind kind, const RowMatrix& u_r, std::size_t label,
                        CumulativeScoring scoring = CumulativeScoring::kResoftmax);

}  // namespace spikekws
