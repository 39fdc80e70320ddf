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

#include "spikekws/losses.hpp"

#include <cmath>

#include "spikekws/error.hpp"

namespace spikekws {
namespace {

void check_inputs(const RowMatrix& u_r, std::size_t label) {
  if (u_r.rows() == 0 || u_r.cols() == 0) throw Error("loss: empty readout trace");
  if (label >= static_cast<std::size_t>(u_r.cols())) {
    throw Error("loss: label " + std::to_string(label) + " out of range for " + std::to_string(u_r.cols()) +
                " classes");
  }
  if (!u_r.allFinite()) throw Error("loss: non-finite readout trace");
}

// CE of one O[t] row and its gradient with respect to that row.
double cumulative_ce(const Eigen::VectorXd& o, std::size_t label, double steps, CumulativeScoring scoring,
                     Eigen::VectorXd* grad) {
  const auto y = static_cast<Eigen::Index>(label);
  if (scoring == CumulativeScoring::kResoftmax) {
    const Eigen::VectorXd lsm = log_softmax(o);
    if (grad != nullptr) {
      *grad = lsm.array().exp().matrix();
      (*grad)[y] -= 1.0;
    }
    return -lsm[y];
  }
  // O[t]/(t+1) as probabilities; `steps` is t+1.
  const double p = o[y] / steps;
  if (!(p > 0.0)) throw Error("loss: cumulative probability of the target class underflowed to zero");
  if (grad != nullptr) {
    *grad = Eigen::VectorXd::Zero(o.size());
    (*grad)[y] = -1.0 / o[y];
  }
  return -std::log(p);
}

// Pulls dL/dsoftmax(U) back to dL/dU.
Eigen::VectorXd softmax_backward(const Eigen::VectorXd& p, const Eigen::VectorXd& g) {
  return p.cwiseProduct(g.array().matrix() - Eigen::VectorXd::Constant(p.size(), p.dot(g)));
}

}  // namespace

LossKind parse_loss_kind(const std::string& name) {
  if (name == "spike_rate") return LossKind::kSpikeRate;
  if (name == "tet") return LossKind::kTet;
  if (name == "cumulative") return LossKind::kCumulative;
  if (name == "ct") return LossKind::kCt;
  throw Error("loss: unknown loss kind '" + name + "' (expected spike_rate, tet, cumulative or ct)");
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kSpikeRate: return "spike_rate";
    case LossKind::kTet: return "tet";
    case LossKind::kCumulative: return "cumulative";
    case LossKind::kCt: return "ct";
  }
  return "?";
}

CumulativeScoring parse_cumulative_scoring(const std::string& name) {
  if (name == "resoftmax") return CumulativeScoring::kResoftmax;
  if (name == "average") return CumulativeScoring::kAverage;
  throw Error("loss: unknown cumulative scoring '" + name + "' (expected resoftmax or average)");
}

std::string to_string(CumulativeScoring scoring) {
  return scoring == CumulativeScoring::kResoftmax ? "resoftmax" : "average";
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

CumulativeOutput cumulative_output(const RowMatrix& u_r) {
  if (!u_r.allFinite()) throw Error("loss: non-finite readout trace");
  CumulativeOutput out;
  out.o.resize(u_r.rows(), u_r.cols());
  Eigen::VectorXd running = Eigen::VectorXd::Zero(u_r.cols());
  for (Eigen::Index t = 0; t < u_r.rows(); ++t) {
    running += softmax(u_r.row(t).transpose());
    out.o.row(t) = running.transpose();
  }
  return out;
}

double ct_loss(const ReadoutTrace& trace, std::size_t label, CumulativeScoring scoring) {
  return loss_with_grad(LossKind::kCt, trace.u_r, label, scoring).value;
}

double spike_rate_loss(const ReadoutTrace& trace, std::size_t label) {
  return loss_with_grad(LossKind::kSpikeRate, trace.u_r, label).value;
}

double tet_loss(const ReadoutTrace& trace, std::size_t label) {
  return loss_with_grad(LossKind::kTet, trace.u_r, label).value;
}

double cumulative_loss(const ReadoutTrace& trace, std::size_t label, CumulativeScoring scoring) {
  return loss_with_grad(LossKind::kCumulative, trace.u_r, label, scoring).value;
}

LossGrad loss_with_grad(LossKind kind, const RowMatrix& u_r, std::size_t label, CumulativeScoring scoring) {
  check_inputs(u_r, label);
  const Eigen::Index steps = u_r.rows();
  const Eigen::Index classes = u_r.cols();
  const auto y = static_cast<Eigen::Index>(label);
  const double inv_t = 1.0 / static_cast<double>(steps);
  LossGrad out;
  out.d_u_r = RowMatrix::Zero(steps, classes);

  switch (kind) {
    case LossKind::kSpikeRate: {
      const Eigen::VectorXd mean = u_r.colwise().sum().transpose() * inv_t;
      const Eigen::VectorXd lsm = log_softmax(mean);
      out.value = -lsm[y];
      Eigen::VectorXd g = lsm.array().exp().matrix();
      g[y] -= 1.0;
      g *= inv_t;
      for (Eigen::Index t = 0; t < steps; ++t) out.d_u_r.row(t) = g.transpose();
      break;
    }
    case LossKind::kTet: {
      double total = 0.0;
      for (Eigen::Index t = 0; t < steps; ++t) {
        const Eigen::VectorXd lsm = log_softmax(u_r.row(t).transpose());
        total += -lsm[y];
        Eigen::VectorXd g = lsm.array().exp().matrix();
        g[y] -= 1.0;
        out.d_u_r.row(t) = (g * inv_t).transpose();
      }
      out.value = total * inv_t;
      break;
    }
    case LossKind::kCumulative:
    case LossKind::kCt: {
      const bool every_step = kind == LossKind::kCt;
      const double weight = every_step ? inv_t : 1.0;
      std::vector<Eigen::VectorXd> probs(static_cast<std::size_t>(steps));
      Eigen::VectorXd running = Eigen::VectorXd::Zero(classes);
      // dL/dO[t] for each t, then suffix sums give dL/dsoftmax(U_R[i]).
      RowMatrix d_o = RowMatrix::Zero(steps, classes);
      double total = 0.0;
      for (Eigen::Index t = 0; t < steps; ++t) {
        probs[static_cast<std::size_t>(t)] = softmax(u_r.row(t).transpose());
        running += probs[static_cast<std::size_t>(t)];
        if (!every_step && t != steps - 1) continue;
        Eigen::VectorXd g;
        total += cumulative_ce(running, label, static_cast<double>(t + 1), scoring, &g);
        d_o.row(t) = (g * weight).transpose();
      }
      out.value = total * weight;
      Eigen::VectorXd suffix = Eigen::VectorXd::Zero(classes);
      for (Eigen::Index t = steps; t-- > 0;) {
        suffix += d_o.row(t).transpose();
        out.d_u_r.row(t) = softmax_backward(probs[static_cast<std::size_t>(t)], suffix).transpose();
      }
      break;
    }
  }
  return out;
}

}  // namespace spikekws
