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

#include "spikekws/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "spikekws/error.hpp"
#include "spikekws/parallel.hpp"
#include "spikekws/rng.hpp"

namespace spikekws {
namespace {

constexpr std::size_t kChunk = 8;

void add_into(Parameters& acc, const Parameters& g) {
  std::vector<double*> dst;
  acc.visit([&](const std::string&, double* d, std::size_t) { dst.push_back(d); });
  std::size_t i = 0;
  g.visit([&](const std::string&, const double* s, std::size_t n) {
    double* d = dst[i++];
    for (std::size_t k = 0; k < n; ++k) d[k] += s[k];
  });
}

void scale(Parameters& p, double factor) {
  p.visit([&](const std::string&, double* d, std::size_t n) {
    for (std::size_t k = 0; k < n; ++k) d[k] *= factor;
  });
}

double run_rate(const Network& net, const ReadoutTrace& trace) {
  double spikes = 0.0;
  for (const auto& layer : trace.spike_counts) {
    for (int c : layer) spikes += c;
  }
  return spikes / (static_cast<double>(net.num_hidden_neurons()) * static_cast<double>(trace.num_steps()));
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs < 1 || batch_size < 1) throw Error("train: epochs and batch_size must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) throw Error("train: learning_rate must be >= 0");
  if (!(surrogate_width > 0.0)) throw Error("train: surrogate_width must be positive");
  if (!(spike_rate_penalty >= 0.0)) throw Error("train: spike_rate_penalty must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0 && adam_eps > 0.0)) {
    throw Error("train: invalid Adam hyperparameters");
  }
}

BatchGradient batch_gradient(const Network& net, std::span<const TrainExample> batch, const TrainConfig& config) {
  if (batch.empty()) throw Error("train: empty batch");
  BackwardOptions opts;
  opts.surrogate_width = config.surrogate_width;
  opts.scoring = config.scoring;
  opts.spike_rate_penalty = config.spike_rate_penalty;

  const std::size_t chunks = (batch.size() + kChunk - 1) / kChunk;
  std::vector<Parameters> partial(chunks);
  std::vector<double> loss(chunks, 0.0);
  std::vector<double> rate(chunks, 0.0);
  parallel_for(chunks, config.threads, [&](std::size_t c) {
    partial[c] = net.params.zeros_like();
    const std::size_t end = std::min(batch.size(), (c + 1) * kChunk);
    for (std::size_t i = c * kChunk; i < end; ++i) {
      BackwardResult r = backward(net, *batch[i].features, batch[i].label, config.loss, opts);
      add_into(partial[c], r.grads);
      loss[c] += r.loss;
      rate[c] += run_rate(net, r.trace);
    }
  });
  BatchGradient out;
  out.grads = std::move(partial[0]);
  out.loss = loss[0];
  out.spike_rate = rate[0];
  for (std::size_t c = 1; c < chunks; ++c) {
    add_into(out.grads, partial[c]);
    out.loss += loss[c];
    out.spike_rate += rate[c];
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  scale(out.grads, inv);
  out.loss *= inv;
  out.spike_rate *= inv;
  return out;
}

AdamOptimizer::AdamOptimizer(const Parameters& shape, const TrainConfig& config)
    : m_(shape.zeros_like()),
      v_(shape.zeros_like()),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_eps),
      lr_(config.learning_rate) {}

void AdamOptimizer::step(Network& net, const Parameters& grads) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  std::vector<double*> ms, vs;
  std::vector<const double*> gs;
  m_.visit([&](const std::string&, double* d, std::size_t) { ms.push_back(d); });
  v_.visit([&](const std::string&, double* d, std::size_t) { vs.push_back(d); });
  grads.visit([&](const std::string&, const double* d, std::size_t) { gs.push_back(d); });
  std::size_t idx = 0;
  net.params.visit([&](const std::string&, double* p, std::size_t n) {
    double* m = ms[idx];
    double* v = vs[idx];
    const double* g = gs[idx];
    ++idx;
    for (std::size_t k = 0; k < n; ++k) {
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
      p[k] -= lr_ * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
    }
  });
  net.clamp();
}

std::vector<EpochMetrics> train(Network& net, std::span<const TrainExample> train_set,
                                std::span<const TrainExample> val_set, const TrainConfig& config,
                                const DecisionConfig& decision, const EpochCallback& on_epoch) {
  config.validate();
  decision.validate();
  if (train_set.empty()) throw Error("train: empty training set");
  for (const auto& ex : train_set) {
    if (ex.label >= net.config.n_classes) throw Error("train: label out of range for the network");
  }

  Rng rng(config.seed);
  AdamOptimizer adam(net.params, config);
  std::map<std::size_t, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < train_set.size(); ++i) by_class[train_set[i].label].push_back(i);
  std::vector<const std::vector<std::size_t>*> classes;
  for (const auto& kv : by_class) classes.push_back(&kv.second);

  std::vector<EvalInput> val_inputs;
  for (const auto& ex : val_set) val_inputs.push_back({ex.features, ex.label, std::nullopt});

  std::vector<EpochMetrics> history;
  std::vector<std::size_t> order(train_set.size());
  std::vector<TrainExample> batch;
  std::size_t batch_index = 0;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.balanced_sampling) {
      for (auto& o : order) {
        const auto& members = *classes[rng.below(classes.size())];
        o = members[rng.below(members.size())];
      }
    } else {
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      rng.shuffle(order);
    }
    double loss_sum = 0.0;
    double rate_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < end; ++i) batch.push_back(train_set[order[i]]);
      BatchGradient bg;
      try {
        bg = batch_gradient(net, batch, config);
      } catch (const Error& e) {
        throw Error("train: batch " + std::to_string(batch_index) + " (epoch " + std::to_string(epoch) +
                    ") failed: " + e.what());
      }
      if (!std::isfinite(bg.loss)) {
        throw Error("train: loss became non-finite at batch " + std::to_string(batch_index) + " (epoch " +
                    std::to_string(epoch) + ")");
      }
      adam.step(net, bg.grads);
      loss_sum += bg.loss * static_cast<double>(batch.size());
      rate_sum += bg.spike_rate * static_cast<double>(batch.size());
      ++batch_index;
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = loss_sum / static_cast<double>(order.size());
    m.mean_spike_rate = rate_sum / static_cast<double>(order.size());
    if (!val_inputs.empty()) {
      const auto runs = run_all(net, val_inputs, config.threads);
      const EvalReport r = summarize(net.config, runs, decision);
      m.val_acc_late = r.acc_late;
      m.val_acc_early = r.acc_early;
    }
    history.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return history;
}

}  // namespace spikekws
