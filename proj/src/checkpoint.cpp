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

#include "spikekws/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "spikekws/error.hpp"

namespace spikekws {
namespace {

using nlohmann::json;

json to_list(const double* data, Eigen::Index n) { return json(std::vector<double>(data, data + n)); }

std::vector<double> list_of(const json& j, const std::string& key, std::size_t expected) {
  if (!j.contains(key)) throw Error("checkpoint: missing field '" + key + "'");
  auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != expected) {
    throw Error("checkpoint: field '" + key + "' has " + std::to_string(v.size()) + " values, expected " +
                std::to_string(expected));
  }
  return v;
}

Eigen::VectorXd vec_of(const json& j, const std::string& key, Eigen::Index n) {
  const auto v = list_of(j, key, static_cast<std::size_t>(n));
  return Eigen::Map<const Eigen::VectorXd>(v.data(), n);
}

RowMatrix mat_of(const json& j, const std::string& key, Eigen::Index rows, Eigen::Index cols) {
  const auto v = list_of(j, key, static_cast<std::size_t>(rows * cols));
  return Eigen::Map<const RowMatrix>(v.data(), rows, cols);
}

json features_json(const FbankConfig& c) {
  return {{"sample_rate", c.sample_rate}, {"window_len", c.window_len}, {"hop_len", c.hop_len},
          {"n_filters", c.n_filters},     {"n_fft", c.n_fft},           {"fmin", c.fmin},
          {"fmax", c.fmax},               {"log_floor", c.log_floor},   {"normalize", c.normalize}};
}

FbankConfig features_from(const json& j) {
  FbankConfig c;
  c.sample_rate = j.at("sample_rate").get<int>();
  c.window_len = j.at("window_len").get<int>();
  c.hop_len = j.at("hop_len").get<int>();
  c.n_filters = j.at("n_filters").get<int>();
  c.n_fft = j.at("n_fft").get<int>();
  c.fmin = j.at("fmin").get<double>();
  c.fmax = j.at("fmax").get<double>();
  c.log_floor = j.at("log_floor").get<double>();
  c.normalize = j.at("normalize").get<bool>();
  c.validate();
  return c;
}

}  // namespace

std::string checkpoint_to_json(const Checkpoint& ckpt) {
  const Network& net = ckpt.net;
  json doc;
  doc["format_version"] = kCheckpointFormatVersion;
  doc["features"] = features_json(ckpt.features);
  doc["network"] = {{"n_inputs", net.config.n_inputs},
                    {"hidden_sizes", net.config.hidden_sizes},
                    {"n_classes", net.config.n_classes},
                    {"readout_decay", net.config.readout_decay},
                    {"v_th", net.v_th}};
  doc["classes"] = ckpt.classes;
  if (net.input_norm.empty()) {
    doc["input_norm"] = nullptr;
  } else {
    doc["input_norm"] = {{"mean", to_list(net.input_norm.mean.data(), net.input_norm.mean.size())},
                         {"inv_std", to_list(net.input_norm.inv_std.data(), net.input_norm.inv_std.size())}};
  }
  json layers = json::array();
  for (const AdLifParams& h : net.params.hidden) {
    layers.push_back({{"weights", to_list(h.weights.data(), h.weights.size())},
                      {"gain", to_list(h.gain.data(), h.gain.size())},
                      {"shift", to_list(h.shift.data(), h.shift.size())},
                      {"alpha", to_list(h.alpha.data(), h.alpha.size())},
                      {"beta", to_list(h.beta.data(), h.beta.size())},
                      {"a", to_list(h.a.data(), h.a.size())},
                      {"b", to_list(h.b.data(), h.b.size())}});
  }
  doc["layers"] = std::move(layers);
  const ReadoutParams& r = net.params.readout;
  doc["readout"] = {{"weights", to_list(r.weights.data(), r.weights.size())},
                    {"gain", to_list(r.gain.data(), r.gain.size())},
                    {"shift", to_list(r.shift.data(), r.shift.size())},
                    {"decay", to_list(r.decay.data(), r.decay.size())}};
  return doc.dump(1);
}

Checkpoint checkpoint_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: invalid JSON: ") + e.what());
  }
  try {
    if (!doc.contains("format_version")) throw Error("checkpoint: missing format_version");
    const int version = doc.at("format_version").get<int>();
    if (version != kCheckpointFormatVersion) {
      throw Error("checkpoint: unsupported format_version " + std::to_string(version));
    }
    Checkpoint ckpt;
    ckpt.features = features_from(doc.at("features"));
    const json& n = doc.at("network");
    NetworkConfig cfg;
    cfg.n_inputs = n.at("n_inputs").get<std::size_t>();
    cfg.hidden_sizes = n.at("hidden_sizes").get<std::vector<std::size_t>>();
    cfg.n_classes = n.at("n_classes").get<std::size_t>();
    cfg.readout_decay = n.at("readout_decay").get<double>();
    cfg.validate();
    Network& net = ckpt.net;
    net.config = cfg;
    net.v_th = n.at("v_th").get<double>();
    if (!(net.v_th > 0.0)) throw Error("checkpoint: v_th must be positive");
    ckpt.classes = doc.at("classes").get<std::vector<std::string>>();
    if (!ckpt.classes.empty() && ckpt.classes.size() != cfg.n_classes) {
      throw Error("checkpoint: class list length does not match n_classes");
    }
    const json& norm = doc.at("input_norm");
    if (!norm.is_null()) {
      const auto w = static_cast<Eigen::Index>(cfg.n_inputs);
      net.input_norm.mean = vec_of(norm, "mean", w);
      net.input_norm.inv_std = vec_of(norm, "inv_std", w);
    }
    const json& layers = doc.at("layers");
    if (layers.size() != cfg.hidden_sizes.size()) throw Error("checkpoint: layer count does not match hidden_sizes");
    auto fan_in = static_cast<Eigen::Index>(cfg.n_inputs);
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto width = static_cast<Eigen::Index>(cfg.hidden_sizes[l]);
      const json& lj = layers[l];
      AdLifParams h;
      h.weights = mat_of(lj, "weights", width, fan_in);
      h.gain = vec_of(lj, "gain", width);
      h.shift = vec_of(lj, "shift", width);
      h.alpha = vec_of(lj, "alpha", width);
      h.beta = vec_of(lj, "beta", width);
      h.a = vec_of(lj, "a", width);
      h.b = vec_of(lj, "b", width);
      net.params.hidden.push_back(std::move(h));
      fan_in = width;
    }
    const json& rj = doc.at("readout");
    const auto k = static_cast<Eigen::Index>(cfg.n_classes);
    net.params.readout.weights = mat_of(rj, "weights", k, fan_in);
    net.params.readout.gain = vec_of(rj, "gain", k);
    net.params.readout.shift = vec_of(rj, "shift", k);
    net.params.readout.decay = vec_of(rj, "decay", k);
    bool finite = true;
    net.params.visit([&](const std::string&, const double* d, std::size_t m) {
      for (std::size_t i = 0; i < m; ++i) finite = finite && std::isfinite(d[i]);
    });
    if (!finite) throw Error("checkpoint: non-finite parameter value");
    return ckpt;
  } catch (const json::exception& e) {
    throw Error(std::string("checkpoint: malformed document: ") + e.what());
  }
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("checkpoint: cannot write " + path.string());
  out << checkpoint_to_json(ckpt) << '\n';
  if (!out) throw Error("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("checkpoint: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return checkpoint_from_json(ss.str());
}

}  // namespace spikekws
