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

#include "spikekws/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "spikekws/error.hpp"
#include "toml.hpp"

namespace spikekws {
namespace {

// Reads typed keys from one table and remembers which ones were consumed.
class Section {
 public:
  Section(const toml::table& root, std::string name) : name_(std::move(name)) {
    if (const toml::node* n = root.get(name_)) {
      table_ = n->as_table();
      if (table_ == nullptr) throw Error("config: [" + name_ + "] must be a table");
    }
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    seen_.insert(key);
    if (table_ == nullptr) return;
    const toml::node* n = table_->get(key);
    if (n == nullptr) return;
    if constexpr (std::is_same_v<T, bool>) {
      auto v = n->value<bool>();
      if (!v) throw bad(key, "a boolean");
      out = *v;
    } else if constexpr (std::is_same_v<T, std::string>) {
      auto v = n->value<std::string>();
      if (!v) throw bad(key, "a string");
      out = *v;
    } else if constexpr (std::is_floating_point_v<T>) {
      auto v = n->value<double>();
      if (!v) throw bad(key, "a number");
      out = *v;
    } else if constexpr (std::is_unsigned_v<T>) {
      auto v = n->value<std::int64_t>();
      if (!v || *v < 0) throw bad(key, "a non-negative integer");
      out = static_cast<T>(*v);
    } else {
      auto v = n->value<std::int64_t>();
      if (!v) throw bad(key, "an integer");
      out = static_cast<T>(*v);
    }
  }

  void read_sizes(const std::string& key, std::vector<std::size_t>& out) {
    seen_.insert(key);
    if (table_ == nullptr) return;
    const toml::node* n = table_->get(key);
    if (n == nullptr) return;
    const toml::array* arr = n->as_array();
    if (arr == nullptr) throw bad(key, "an array of integers");
    out.clear();
    for (const auto& el : *arr) {
      auto v = el.value<std::int64_t>();
      if (!v || *v < 1) throw bad(key, "an array of positive integers");
      out.push_back(static_cast<std::size_t>(*v));
    }
  }

  void reject_unknown() const {
    if (table_ == nullptr) return;
    for (const auto& [k, v] : *table_) {
      if (!seen_.count(std::string(k.str()))) {
        throw Error("config: unknown key '" + std::string(k.str()) + "' in [" + name_ + "]");
      }
    }
  }

 private:
  Error bad(const std::string& key, const std::string& what) const {
    return Error("config: [" + name_ + "] " + key + " must be " + what);
  }

  std::string name_;
  const toml::table* table_ = nullptr;
  std::set<std::string> seen_;
};

}  // namespace

void RunConfig::validate() const {
  features.validate();
  network.validate();
  train.validate();
  decision.validate();
  energy.validate();
  if (network.n_inputs != static_cast<std::size_t>(features.n_filters)) {
    throw Error("config: network.n_inputs must equal features.n_filters");
  }
  if (dataset_gen.n_classes < 2 || dataset_gen.per_class < 1) {
    throw Error("config: dataset_gen needs n_classes >= 2 and per_class >= 1");
  }
}

std::filesystem::path RunConfig::checkpoint_path() const {
  if (!paths.checkpoint.empty()) return paths.checkpoint;
  return std::filesystem::path(paths.out_dir) / "checkpoint.json";
}

RunConfig parse_run_config(const std::string& toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "config: TOML parse error at line " << e.source().begin.line << ": " << e.description();
    throw Error(os.str());
  }
  static const std::set<std::string> kTables = {"features", "network", "train",      "decision",
                                                "energy",   "paths",   "dataset_gen"};
  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (key == "seed") continue;
    if (!kTables.count(key)) throw Error("config: unknown top-level key '" + key + "'");
  }

  RunConfig c;
  if (const toml::node* n = root.get("seed")) {
    auto v = n->value<std::int64_t>();
    if (!v || *v < 0) throw Error("config: seed must be a non-negative integer");
    c.seed = static_cast<std::uint64_t>(*v);
  }

  Section f(root, "features");
  f.read("sample_rate", c.features.sample_rate);
  f.read("window_len", c.features.window_len);
  f.read("hop_len", c.features.hop_len);
  f.read("n_filters", c.features.n_filters);
  f.read("n_fft", c.features.n_fft);
  f.read("fmin", c.features.fmin);
  f.read("fmax", c.features.fmax);
  f.read("log_floor", c.features.log_floor);
  f.read("normalize", c.features.normalize);
  f.reject_unknown();

  Section n(root, "network");
  c.network.n_inputs = static_cast<std::size_t>(c.features.n_filters);
  n.read("n_inputs", c.network.n_inputs);
  n.read_sizes("hidden_sizes", c.network.hidden_sizes);
  n.read("n_classes", c.network.n_classes);
  n.read("readout_decay", c.network.readout_decay);
  n.reject_unknown();

  Section t(root, "train");
  std::string loss = to_string(c.train.loss);
  std::string scoring = to_string(c.train.scoring);
  t.read("epochs", c.train.epochs);
  t.read("batch_size", c.train.batch_size);
  t.read("learning_rate", c.train.learning_rate);
  t.read("surrogate_width", c.train.surrogate_width);
  t.read("loss", loss);
  t.read("cumulative_scoring", scoring);
  t.read("spike_rate_penalty", c.train.spike_rate_penalty);
  t.read("balanced_sampling", c.train.balanced_sampling);
  t.read("threads", c.train.threads);
  t.read("adam_beta1", c.train.adam_beta1);
  t.read("adam_beta2", c.train.adam_beta2);
  t.read("adam_eps", c.train.adam_eps);
  t.reject_unknown();
  c.train.loss = parse_loss_kind(loss);
  c.train.scoring = parse_cumulative_scoring(scoring);
  c.train.seed = c.seed + 1;

  Section d(root, "decision");
  d.read("threshold_c", c.decision.threshold_c);
  d.read("min_timestep", c.decision.min_timestep);
  d.reject_unknown();

  Section e(root, "energy");
  e.read("e_mac", c.energy.e_mac);
  e.read("e_acc", c.energy.e_acc);
  e.reject_unknown();

  Section p(root, "paths");
  p.read("dataset_root", c.paths.dataset_root);
  p.read("manifest", c.paths.manifest);
  p.read("checkpoint", c.paths.checkpoint);
  p.read("out_dir", c.paths.out_dir);
  p.reject_unknown();

  Section g(root, "dataset_gen");
  g.read("n_classes", c.dataset_gen.n_classes);
  g.read("per_class", c.dataset_gen.per_class);
  g.reject_unknown();

  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("config: cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

std::string to_toml(const RunConfig& c) {
  toml::array hidden;
  for (std::size_t h : c.network.hidden_sizes) hidden.push_back(static_cast<std::int64_t>(h));
  toml::table root{
      {"seed", static_cast<std::int64_t>(c.seed)},
      {"features",
       toml::table{{"sample_rate", c.features.sample_rate},
                   {"window_len", c.features.window_len},
                   {"hop_len", c.features.hop_len},
                   {"n_filters", c.features.n_filters},
                   {"n_fft", c.features.n_fft},
                   {"fmin", c.features.fmin},
                   {"fmax", c.features.fmax},
                   {"log_floor", c.features.log_floor},
                   {"normalize", c.features.normalize}}},
      {"network",
       toml::table{{"n_inputs", static_cast<std::int64_t>(c.network.n_inputs)},
                   {"hidden_sizes", hidden},
                   {"n_classes", static_cast<std::int64_t>(c.network.n_classes)},
                   {"readout_decay", c.network.readout_decay}}},
      {"train",
       toml::table{{"epochs", static_cast<std::int64_t>(c.train.epochs)},
                   {"batch_size", static_cast<std::int64_t>(c.train.batch_size)},
                   {"learning_rate", c.train.learning_rate},
                   {"surrogate_width", c.train.surrogate_width},
                   {"loss", to_string(c.train.loss)},
                   {"cumulative_scoring", to_string(c.train.scoring)},
                   {"spike_rate_penalty", c.train.spike_rate_penalty},
                   {"balanced_sampling", c.train.balanced_sampling},
                   {"threads", static_cast<std::int64_t>(c.train.threads)},
                   {"adam_beta1", c.train.adam_beta1},
                   {"adam_beta2", c.train.adam_beta2},
                   {"adam_eps", c.train.adam_eps}}},
      {"decision",
       toml::table{{"threshold_c", c.decision.threshold_c},
                   {"min_timestep", static_cast<std::int64_t>(c.decision.min_timestep)}}},
      {"energy", toml::table{{"e_mac", c.energy.e_mac}, {"e_acc", c.energy.e_acc}}},
      {"paths",
       toml::table{{"dataset_root", c.paths.dataset_root},
                   {"manifest", c.paths.manifest},
                   {"checkpoint", c.paths.checkpoint},
                   {"out_dir", c.paths.out_dir}}},
      {"dataset_gen",
       toml::table{{"n_classes", static_cast<std::int64_t>(c.dataset_gen.n_classes)},
                   {"per_class", static_cast<std::int64_t>(c.dataset_gen.per_class)}}},
  };
  std::ostringstream os;
  os << root << '\n';
  return os.str();
}

}  // namespace spikekws
