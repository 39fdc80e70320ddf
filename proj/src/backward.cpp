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

#include "spikekws/backward.hpp"

#include <cmath>
#include <vector>

#include "spikekws/error.hpp"

namespace spikekws {
namespace {

// Per-layer history, one column per timestep.
struct LayerTape {
  Eigen::MatrixXd input;
  Eigen::MatrixXd z;
  Eigen::MatrixXd x;
  Eigen::MatrixXd u;
  Eigen::MatrixXd s;
};

struct Tape {
  std::vector<LayerTape> layers;
  Eigen::MatrixXd readout_z;
  ReadoutTrace trace;
};

Tape record(const Network& net, const FeatureMatrix& features) {
  if (features.num_features() != net.config.n_inputs) {
    throw Error("backward: features have width " + std::to_string(features.num_features()) + ", network expects " +
                std::to_string(net.config.n_inputs));
  }
  const auto steps = static_cast<Eigen::Index>(features.num_frames());
  if (steps == 0) throw Error("backward: empty feature matrix");
  const auto& hidden = net.params.hidden;
  Tape tape;
  tape.layers.resize(hidden.size());
  for (std::size_t l = 0; l < hidden.size(); ++l) {
    const auto n = static_cast<Eigen::Index>(hidden[l].width());
    LayerTape& lt = tape.layers[l];
    lt.input.resize(static_cast<Eigen::Index>(hidden[l].fan_in()), steps);
    lt.z.resize(n, steps);
    lt.x.resize(n, steps);
    lt.u.resize(n, steps);
    lt.s.resize(n, steps);
  }
  const auto k = static_cast<Eigen::Index>(net.config.n_classes);
  tape.readout_z.resize(k, steps);
  tape.trace.u_r.resize(steps, k);
  tape.trace.spike_counts.assign(hidden.size(), std::vector<int>(static_cast<std::size_t>(steps), 0));

  StreamingState state(net);
  for (Eigen::Index t = 0; t < steps; ++t) {
    const auto row = features.frames.row(t);
    const Eigen::VectorXd& u_r = state.step(std::span<const double>(row.data(), static_cast<std::size_t>(row.size())));
    tape.trace.u_r.row(t) = u_r.transpose();
    tape.readout_z.col(t) = state.readout_projection();
    for (std::size_t l = 0; l < hidden.size(); ++l) {
      LayerTape& lt = tape.layers[l];
      lt.input.col(t) = state.layer_input(l);
      lt.z.col(t) = state.layer_projection(l);
      lt.x.col(t) = state.layer_drive(l);
      lt.u.col(t) = state.layer_state(l).u_mem;
      lt.s.col(t) = state.layer_state(l).spikes;
      tape.trace.spike_counts[l][static_cast<std::size_t>(t)] = state.spike_counts()[l];
    }
  }
  return tape;
}

void require_finite(const Eigen::VectorXd& v, const std::string& where, Eigen::Index t) {
  if (!v.allFinite()) {
    throw Error("backward: non-finite gradient in " + where + " at timestep " + std::to_string(t));
  }
}

}  // namespace

BackwardResult backward(const Network& net, const FeatureMatrix& features, std::size_t label, LossKind loss,
                        const BackwardOptions& options) {
  if (!(options.surrogate_width > 0.0)) throw Error("backward: surrogate_width must be positive");
  Tape tape = record(net, features);
  const auto& hidden = net.params.hidden;
  const ReadoutParams& ro = net.params.readout;
  const std::size_t layers = hidden.size();
  const Eigen::Index steps = tape.trace.u_r.rows();
  for (std::size_t l = 0; l < layers; ++l) {
    if (!tape.layers[l].u.allFinite()) {
      throw Error("backward: non-finite membrane potential in layer " + std::to_string(l));
    }
  }

  LossGrad lg = loss_with_grad(loss, tape.trace.u_r, label, options.scoring);
  BackwardResult out;
  out.loss = lg.value * options.loss_scale;
  lg.d_u_r *= options.loss_scale;

  // Firing-rate penalty: P = w * sum_l r_l^2 with r_l the mean spike rate.
  std::vector<double> penalty_grad(layers, 0.0);
  if (options.spike_rate_penalty > 0.0) {
    for (std::size_t l = 0; l < layers; ++l) {
      const double denom = static_cast<double>(steps) * static_cast<double>(hidden[l].width());
      const double rate = tape.layers[l].s.sum() / denom;
      out.loss += options.loss_scale * options.spike_rate_penalty * rate * rate;
      penalty_grad[l] = options.loss_scale * options.spike_rate_penalty * 2.0 * rate / denom;
    }
  }

  out.grads = net.params.zeros_like();
  Parameters& g = out.grads;
  const double inv_width = 1.0 / options.surrogate_width;
  const double half_width = 0.5 * options.surrogate_width;

  std::vector<Eigen::MatrixXd> pending_s(layers);
  std::vector<Eigen::VectorXd> g_u_next(layers);
  std::vector<Eigen::VectorXd> leak(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    const auto n = static_cast<Eigen::Index>(hidden[l].width());
    pending_s[l] = Eigen::MatrixXd::Zero(n, steps);
    g_u_next[l] = Eigen::VectorXd::Zero(n);
    leak[l] = hidden[l].alpha + hidden[l].a;
  }
  const auto k = static_cast<Eigen::Index>(net.config.n_classes);
  Eigen::VectorXd g_ur_next = Eigen::VectorXd::Zero(k);

  for (Eigen::Index t = steps; t-- > 0;) {
    // Readout: U_R[t] = decay*U_R[t-1] + gain*(W S_L[t]) + shift.
    const Eigen::VectorXd g_ur = lg.d_u_r.row(t).transpose() + ro.decay.cwiseProduct(g_ur_next);
    require_finite(g_ur, "readout", t);
    if (t > 0) g.readout.decay += g_ur.cwiseProduct(tape.trace.u_r.row(t - 1).transpose());
    g.readout.gain += g_ur.cwiseProduct(tape.readout_z.col(t));
    g.readout.shift += g_ur;
    const Eigen::VectorXd g_zr = g_ur.cwiseProduct(ro.gain);
    const auto last_spikes = tape.layers[layers - 1].s.col(t);
    g.readout.weights.noalias() += g_zr * last_spikes.transpose();
    pending_s[layers - 1].col(t).noalias() += ro.weights.transpose() * g_zr;
    g_ur_next = g_ur;

    for (std::size_t l = layers; l-- > 0;) {
      const AdLifParams& p = hidden[l];
      AdLifParams& gp = g.hidden[l];
      const LayerTape& lt = tape.layers[l];
      const auto n = static_cast<Eigen::Index>(p.width());

      Eigen::VectorXd g_s = pending_s[l].col(t);
      if (penalty_grad[l] != 0.0) g_s.array() += penalty_grad[l];
      Eigen::VectorXd g_u_t = leak[l].cwiseProduct(g_u_next[l]);
      if (!options.hold_spikes) {
        for (Eigen::Index j = 0; j < n; ++j) {
          if (std::abs(lt.u(j, t) - net.v_th) <= half_width) g_u_t[j] += g_s[j] * inv_width;
        }
      }
      require_finite(g_u_t, "layer " + std::to_string(l), t);

      if (t > 0) {
        const auto u_prev = lt.u.col(t - 1);
        const auto s_prev = lt.s.col(t - 1);
        gp.alpha.array() += g_u_t.array() * (u_prev.array() - net.v_th * s_prev.array());
        gp.a += g_u_t.cwiseProduct(u_prev);
        gp.b += g_u_t.cwiseProduct(s_prev);
        // b*S[t-1] feeds U[t]; the reset term is detached.
        pending_s[l].col(t - 1) += g_u_t.cwiseProduct(p.b);
      }
      gp.beta += g_u_t.cwiseProduct(lt.x.col(t));
      const Eigen::VectorXd g_xl = g_u_t.cwiseProduct(p.beta);
      gp.gain += g_xl.cwiseProduct(lt.z.col(t));
      gp.shift += g_xl;
      const Eigen::VectorXd g_zl = g_xl.cwiseProduct(p.gain);
      gp.weights.noalias() += g_zl * lt.input.col(t).transpose();
      // Input of layer l at t is the spike vector of layer l-1 at t-1.
      if (l > 0 && t > 0) pending_s[l - 1].col(t - 1).noalias() += p.weights.transpose() * g_zl;
      g_u_next[l] = std::move(g_u_t);
    }
  }
  out.trace = std::move(tape.trace);
  return out;
}

}  // namespace spikekws
