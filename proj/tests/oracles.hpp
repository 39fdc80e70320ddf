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

// Reference implementations for the tests. Everything here is written with
// plain loops over std::vector and shares no code with the library beyond
// the parameter containers it reads from.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include "spikekws/snn.hpp"

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline double log_sum_exp(const std::vector<double>& v) {
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

inline std::vector<double> softmax(const std::vector<double>& v) {
  const double lse = log_sum_exp(v);
  std::vector<double> p(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = std::exp(v[i] - lse);
  return p;
}

inline double ce(const std::vector<double>& scores, std::size_t y) { return log_sum_exp(scores) - scores[y]; }

inline Mat cumulative(const Mat& u) {
  Mat o(u.size(), std::vector<double>(u[0].size(), 0.0));
  for (std::size_t t = 0; t < u.size(); ++t) {
    for (std::size_t i = 0; i <= t; ++i) {
      const auto p = softmax(u[i]);
      for (std::size_t k = 0; k < p.size(); ++k) o[t][k] += p[k];
    }
  }
  return o;
}

inline double ct(const Mat& u, std::size_t y) {
  const Mat o = cumulative(u);
  double s = 0.0;
  for (const auto& row : o) s += ce(row, y);
  return s / static_cast<double>(u.size());
}

inline double ct_average(const Mat& u, std::size_t y) {
  const Mat o = cumulative(u);
  double s = 0.0;
  for (std::size_t t = 0; t < o.size(); ++t) s -= std::log(o[t][y] / static_cast<double>(t + 1));
  return s / static_cast<double>(u.size());
}

inline double cumulative_final(const Mat& u, std::size_t y) { return ce(cumulative(u).back(), y); }

inline double tet(const Mat& u, std::size_t y) {
  double s = 0.0;
  for (const auto& row : u) s += ce(row, y);
  return s / static_cast<double>(u.size());
}

inline double spike_rate(const Mat& u, std::size_t y) {
  std::vector<double> mean(u[0].size(), 0.0);
  for (const auto& row : u) {
    for (std::size_t k = 0; k < row.size(); ++k) mean[k] += row[k];
  }
  for (double& m : mean) m /= static_cast<double>(u.size());
  return ce(mean, y);
}

// One adaptive LIF update for a single neuron, written out term by term.
struct NeuronOut {
  double i_syn, u, s;
};

inline NeuronOut adlif(double u_prev, double s_prev, double x, double alpha, double beta, double a, double b,
                       double v_th) {
  const double i_syn = beta * x + a * u_prev + b * s_prev;
  const double u = alpha * (u_prev - v_th * s_prev) + i_syn;
  return {i_syn, u, u >= v_th ? 1.0 : 0.0};
}

// Forward-mode dual number.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};
inline Dual operator+(Dual x, Dual y) { return {x.v + y.v, x.d + y.d}; }
inline Dual operator-(Dual x, Dual y) { return {x.v - y.v, x.d - y.d}; }
inline Dual operator*(Dual x, Dual y) { return {x.v * y.v, x.d * y.v + x.v * y.d}; }
inline Dual operator/(Dual x, Dual y) { return {x.v / y.v, (x.d * y.v - x.v * y.d) / (y.v * y.v)}; }
inline Dual exp(Dual x) {
  const double e = std::exp(x.v);
  return {e, e * x.d};
}
inline Dual log(Dual x) { return {std::log(x.v), x.d / x.v}; }
inline double value(Dual x) { return x.v; }
inline double value(double x) { return x; }
inline Dual constant(double x, Dual) { return {x, 0.0}; }
inline double constant(double x, double) { return x; }

// Flat copy of a network's parameters in Parameters::visit order.
inline std::vector<double> flatten(const spikekws::Parameters& p) {
  std::vector<double> flat;
  p.visit([&](const std::string&, const double* data, std::size_t n) { flat.insert(flat.end(), data, data + n); });
  return flat;
}

struct SurrogateRule {
  double width = 1.0;
  bool hold_spikes = false;
};

// Scalar forward over flattened parameters; returns U_R as T x K. With T =
// Dual the derivative of U_R follows the surrogate rule: dS/dU is 1/width
// inside the window, the reset term carries no derivative.
template <typename T>
std::vector<std::vector<T>> forward(const spikekws::NetworkConfig& cfg, const std::vector<T>& theta,
                                    const Mat& frames, double v_th, const SurrogateRule& rule,
                                    std::vector<std::vector<std::vector<double>>>* spikes_out = nullptr) {
  const std::size_t layers = cfg.hidden_sizes.size();
  struct L {
    std::size_t n_in, n;
    std::size_t w, gain, shift, alpha, beta, a, b;
  };
  std::vector<L> ls;
  std::size_t pos = 0;
  for (std::size_t l = 0; l < layers; ++l) {
    L x;
    x.n_in = l == 0 ? cfg.n_inputs : cfg.hidden_sizes[l - 1];
    x.n = cfg.hidden_sizes[l];
    x.w = pos;
    pos += x.n * x.n_in;
    x.gain = pos;
    pos += x.n;
    x.shift = pos;
    pos += x.n;
    x.alpha = pos;
    pos += x.n;
    x.beta = pos;
    pos += x.n;
    x.a = pos;
    pos += x.n;
    x.b = pos;
    pos += x.n;
    ls.push_back(x);
  }
  const std::size_t k = cfg.n_classes;
  const std::size_t h_last = cfg.hidden_sizes.back();
  const std::size_t rw = pos, rgain = rw + k * h_last, rshift = rgain + k, rdecay = rshift + k;

  const T zero = constant(0.0, theta[0]);
  std::vector<std::vector<T>> u(layers), s(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    u[l].assign(ls[l].n, zero);
    s[l].assign(ls[l].n, zero);
  }
  std::vector<T> ur(k, zero);
  std::vector<std::vector<T>> out;
  if (spikes_out) spikes_out->assign(layers, {});

  for (std::size_t t = 0; t < frames.size(); ++t) {
    const auto s_prev = s;
    for (std::size_t l = 0; l < layers; ++l) {
      const L& p = ls[l];
      std::vector<double> spikes_now(p.n);
      for (std::size_t j = 0; j < p.n; ++j) {
        T z = zero;
        for (std::size_t i = 0; i < p.n_in; ++i) {
          const T in = l == 0 ? constant(frames[t][i], zero) : s_prev[l - 1][i];
          z = z + theta[p.w + j * p.n_in + i] * in;
        }
        const T x = theta[p.gain + j] * z + theta[p.shift + j];
        const T sp = s_prev[l][j];
        const T reset = constant(value(sp), zero);
        const T i_syn = theta[p.beta + j] * x + theta[p.a + j] * u[l][j] + theta[p.b + j] * sp;
        const T un = theta[p.alpha + j] * (u[l][j] - constant(v_th, zero) * reset) + i_syn;
        const double uv = value(un);
        const double spike = uv >= v_th ? 1.0 : 0.0;
        T sn = constant(spike, zero);
        if constexpr (std::is_same_v<T, Dual>) {
          if (!rule.hold_spikes && std::abs(uv - v_th) <= rule.width / 2) sn.d = un.d / rule.width;
        }
        u[l][j] = un;
        s[l][j] = sn;
        spikes_now[j] = spike;
      }
      if (spikes_out) (*spikes_out)[l].push_back(spikes_now);
    }
    for (std::size_t c = 0; c < k; ++c) {
      T z = zero;
      for (std::size_t j = 0; j < h_last; ++j) z = z + theta[rw + c * h_last + j] * s[layers - 1][j];
      ur[c] = theta[rdecay + c] * ur[c] + (theta[rgain + c] * z + theta[rshift + c]);
    }
    out.push_back(ur);
  }
  return out;
}

template <typename T>
T log_sum_exp_t(const std::vector<T>& v) {
  double m = value(v[0]);
  for (const T& x : v) m = std::max(m, value(x));
  T s = constant(0.0, v[0]);
  for (const T& x : v) s = s + exp(x - constant(m, v[0]));
  return constant(m, v[0]) + log(s);
}

template <typename T>
std::vector<T> softmax_t(const std::vector<T>& v) {
  const T lse = log_sum_exp_t(v);
  std::vector<T> p;
  for (const T& x : v) p.push_back(exp(x - lse));
  return p;
}

// kind: 0 spike-rate, 1 TET, 2 cumulative, 3 CT (resoftmax scoring).
template <typename T>
T loss_t(int kind, const std::vector<std::vector<T>>& u, std::size_t y) {
  const T zero = constant(0.0, u[0][0]);
  const std::size_t steps = u.size(), k = u[0].size();
  const T inv_t = constant(1.0 / static_cast<double>(steps), zero);
  if (kind == 0) {
    std::vector<T> mean(k, zero);
    for (const auto& row : u) {
      for (std::size_t c = 0; c < k; ++c) mean[c] = mean[c] + row[c];
    }
    for (auto& m : mean) m = m * inv_t;
    return log_sum_exp_t(mean) - mean[y];
  }
  if (kind == 1) {
    T s = zero;
    for (const auto& row : u) s = s + (log_sum_exp_t(row) - row[y]);
    return s * inv_t;
  }
  std::vector<T> o(k, zero);
  T s = zero;
  for (std::size_t t = 0; t < steps; ++t) {
    const auto p = softmax_t(u[t]);
    for (std::size_t c = 0; c < k; ++c) o[c] = o[c] + p[c];
    if (kind == 3 || t + 1 == steps) s = s + (log_sum_exp_t(o) - o[y]);
  }
  return kind == 3 ? s * inv_t : s;
}

// Kaldi-style triangular filter m evaluated at FFT bin k, from the HTK mel
// formula.
inline double mel_weight(int m, int k, int n_filters, int n_fft, double sample_rate, double fmin, double fmax) {
  auto mel = [](double hz) { return 1127.0 * std::log(1.0 + hz / 700.0); };
  const double lo = mel(fmin), hi = mel(fmax);
  const double step = (hi - lo) / (n_filters + 1);
  const double left = lo + m * step, center = lo + (m + 1) * step, right = lo + (m + 2) * step;
  const double f = mel(sample_rate * k / n_fft);
  if (f <= left || f >= right) return 0.0;
  if (f <= center) return (f - left) / (center - left);
  return (right - f) / (right - center);
}

// Log mel energies of one frame by direct O(N^2) DFT.
inline std::vector<double> fbank_frame_dft(const std::vector<double>& audio, std::size_t start, int window, int n_fft,
                                           int n_filters, double sample_rate, double fmin, double fmax,
                                           double floor) {
  std::vector<double> x(static_cast<std::size_t>(n_fft), 0.0);
  for (int n = 0; n < window; ++n) {
    const double w = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * n / (window - 1));
    x[static_cast<std::size_t>(n)] = audio[start + static_cast<std::size_t>(n)] * w;
  }
  const int bins = n_fft / 2 + 1;
  std::vector<double> power(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) {
    double re = 0.0, im = 0.0;
    for (int n = 0; n < n_fft; ++n) {
      const double ang = -2.0 * std::numbers::pi * static_cast<double>((static_cast<long>(k) * n) % n_fft) / n_fft;
      re += x[static_cast<std::size_t>(n)] * std::cos(ang);
      im += x[static_cast<std::size_t>(n)] * std::sin(ang);
    }
    power[static_cast<std::size_t>(k)] = re * re + im * im;
  }
  std::vector<double> out(static_cast<std::size_t>(n_filters));
  for (int m = 0; m < n_filters; ++m) {
    double e = 0.0;
    for (int k = 0; k < bins; ++k) e += mel_weight(m, k, n_filters, n_fft, sample_rate, fmin, fmax) * power[k];
    out[static_cast<std::size_t>(m)] = std::log(std::max(e, floor));
  }
  return out;
}

struct Ops {
  unsigned long long mac = 0, acc = 0;
};

// Operation count from per-neuron spike vectors [layer][t][neuron], one
// neuron at a time: dense input projection and the two multiplies of the
// neuron update are MACs; the input merge, recurrent spike term and every
// spike-driven synapse are accumulates; each readout leak is a MAC.
inline Ops count_ops(const spikekws::NetworkConfig& cfg, const std::vector<std::vector<std::vector<double>>>& spikes,
                     std::size_t t_stop) {
  Ops ops;
  const std::size_t layers = cfg.hidden_sizes.size();
  for (std::size_t t = 0; t < t_stop; ++t) {
    for (std::size_t l = 0; l < layers; ++l) {
      for (std::size_t j = 0; j < cfg.hidden_sizes[l]; ++j) {
        if (l == 0) {
          ops.mac += cfg.n_inputs;
        } else if (t > 0) {
          for (double sp : spikes[l - 1][t - 1]) ops.acc += sp > 0 ? 1 : 0;
        }
        ops.mac += 2;
        ops.acc += 1;
        if (t > 0 && spikes[l][t - 1][j] > 0) ops.acc += 1;
      }
    }
    for (std::size_t c = 0; c < cfg.n_classes; ++c) {
      ops.mac += 1;
      for (double sp : spikes[layers - 1][t]) ops.acc += sp > 0 ? 1 : 0;
    }
  }
  return ops;
}

}  // namespace oracle
