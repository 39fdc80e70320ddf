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

#include "spikekws/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "spikekws/error.hpp"
#include "spikekws/wav.hpp"

namespace spikekws {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::set<std::string> read_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("dataset: missing list file " + path.string());
  std::set<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty()) entries.insert(line);
  }
  return entries;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return (path.is_absolute() ? path : base / path).lexically_normal();
}

}  // namespace

std::string to_string(Split split) {
  switch (split) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::kTrain;
  if (name == "val" || name == "validation") return Split::kVal;
  if (name == "test") return Split::kTest;
  throw Error("dataset: unknown split '" + name + "'");
}

void Manifest::validate() const {
  std::unordered_set<std::string> names;
  for (const auto& c : classes) {
    if (!names.insert(c).second) throw Error("dataset: duplicate class name '" + c + "'");
  }
  if (sample_rate <= 0 || !(clip_seconds > 0.0)) throw Error("dataset: invalid sample_rate or clip_seconds");
  std::unordered_set<std::string> paths;
  for (const Sample& s : samples) {
    const std::string where = s.audio_path.string();
    if (s.label >= classes.size()) throw Error("dataset: " + where + ": label index out of range");
    const double lo = s.t_begin.value_or(0.0);
    const double hi = s.t_end.value_or(clip_seconds);
    if (!(lo >= 0.0 && hi <= clip_seconds && lo < hi) || (s.t_begin && !std::isfinite(*s.t_begin)) ||
        (s.t_end && !std::isfinite(*s.t_end))) {
      throw Error("dataset: " + where + ": timestamps must satisfy 0 <= t_begin < t_end <= clip duration");
    }
    if (!paths.insert(where).second) throw Error("dataset: " + where + " appears more than once");
  }
}

std::vector<std::size_t> Manifest::indices(Split split) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].split == split) out.push_back(i);
  }
  return out;
}

std::size_t Manifest::clip_samples() const {
  return static_cast<std::size_t>(std::llround(clip_seconds * sample_rate));
}

Manifest load_gsc(const fs::path& root) {
  if (!fs::is_directory(root)) throw Error("dataset: GSC root " + root.string() + " is not a directory");
  const auto val = read_list(root / "validation_list.txt");
  const auto test = read_list(root / "testing_list.txt");
  Manifest m;
  std::vector<std::string> dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && !name.empty() && name[0] != '_') dirs.push_back(name);
  }
  std::sort(dirs.begin(), dirs.end());
  m.classes = dirs;
  for (std::size_t c = 0; c < dirs.size(); ++c) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(root / dirs[c])) {
      if (entry.is_regular_file() && entry.path().extension() == ".wav") {
        files.push_back(entry.path().filename().string());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string rel = dirs[c] + "/" + f;
      Sample s;
      s.audio_path = (root / rel).lexically_normal();
      s.label = c;
      s.split = test.count(rel) ? Split::kTest : (val.count(rel) ? Split::kVal : Split::kTrain);
      const WavInfo info = probe_wav(s.audio_path, m.sample_rate);
      if (info.num_samples > m.clip_samples()) {
        throw Error("dataset: " + s.audio_path.string() + " is longer than " + std::to_string(m.clip_seconds) + " s");
      }
      m.samples.push_back(std::move(s));
    }
  }
  m.validate();
  return m;
}

Manifest parse_manifest(const std::string& text, const fs::path& base_dir) {
  Manifest m;
  bool have_header = false;
  struct Pending {
    Sample sample;
    std::string label;
    std::size_t line;
  };
  std::vector<Pending> pending;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = "dataset: manifest line " + std::to_string(line_no) + ": ";
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw Error(where + "malformed JSON");
    }
    try {
      if (j.contains("classes")) {
        if (have_header || !pending.empty()) throw Error(where + "header must be the first line");
        m.classes = j.at("classes").get<std::vector<std::string>>();
        m.sample_rate = j.value("sample_rate", 16000);
        m.clip_seconds = j.value("clip_seconds", 1.0);
        have_header = true;
        continue;
      }
      Pending p;
      p.line = line_no;
      p.sample.audio_path = resolve(base_dir, j.at("path").get<std::string>());
      p.label = j.at("label").get<std::string>();
      if (j.contains("t_begin") && !j.at("t_begin").is_null()) p.sample.t_begin = j.at("t_begin").get<double>();
      if (j.contains("t_end") && !j.at("t_end").is_null()) p.sample.t_end = j.at("t_end").get<double>();
      p.sample.split = parse_split(j.value("split", std::string("train")));
      const double lo = p.sample.t_begin.value_or(0.0);
      const double hi = p.sample.t_end.value_or(m.clip_seconds);
      if (!(lo >= 0.0 && lo < hi && hi <= m.clip_seconds)) {
        throw Error(where + "timestamps out of range (need 0 <= t_begin < t_end <= " +
                    std::to_string(m.clip_seconds) + ")");
      }
      pending.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw Error(where + e.what());
    } catch (const Error& e) {
      const std::string msg = e.what();
      throw Error(msg.rfind("dataset: manifest line", 0) == 0 ? msg : where + msg);
    }
  }
  if (!have_header) {
    std::set<std::string> labels;
    for (const auto& p : pending) labels.insert(p.label);
    m.classes.assign(labels.begin(), labels.end());
  }
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < m.classes.size(); ++i) index.emplace(m.classes[i], i);
  for (auto& p : pending) {
    auto it = index.find(p.label);
    if (it == index.end()) {
      throw Error("dataset: manifest line " + std::to_string(p.line) + ": unknown class '" + p.label + "'");
    }
    p.sample.label = it->second;
    m.samples.push_back(std::move(p.sample));
  }
  m.validate();
  return m;
}

Manifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("dataset: cannot open manifest " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.parent_path());
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  manifest.validate();
  const fs::path base = path.parent_path().lexically_normal();
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("dataset: cannot write manifest " + path.string());
  json header = {{"classes", manifest.classes},
                 {"sample_rate", manifest.sample_rate},
                 {"clip_seconds", manifest.clip_seconds}};
  out << header.dump() << '\n';
  for (const Sample& s : manifest.samples) {
    fs::path rel = s.audio_path.lexically_relative(base);
    if (rel.empty() || *rel.begin() == "..") rel = s.audio_path;
    json j;
    j["path"] = rel.generic_string();
    j["label"] = manifest.classes[s.label];
    if (s.t_begin) j["t_begin"] = *s.t_begin;
    if (s.t_end) j["t_end"] = *s.t_end;
    j["split"] = to_string(s.split);
    out << j.dump() << '\n';
  }
  if (!out) throw Error("dataset: write failed for " + path.string());
}

std::vector<double> load_clip(const Manifest& manifest, const Sample& sample) {
  std::vector<double> audio = read_wav(sample.audio_path, manifest.sample_rate);
  const std::size_t want = manifest.clip_samples();
  if (audio.size() > want) {
    throw Error("dataset: " + sample.audio_path.string() + " has " + std::to_string(audio.size()) +
                " samples, more than the " + std::to_string(want) + "-sample clip length");
  }
  audio.resize(want, 0.0);
  return audio;
}

Manifest synth_dataset(const SynthOptions& options, const fs::path& out_dir) {
  if (options.n_classes < 2) throw Error("dataset: synthetic corpus needs at least 2 classes");
  if (options.per_class < 1) throw Error("dataset: synthetic corpus needs at least 1 sample per class");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) throw Error("dataset: cannot create output directory " + out_dir.string());

  Manifest m;
  m.sample_rate = options.sample_rate;
  m.clip_seconds = 1.0;
  const std::size_t clip = m.clip_samples();
  const double sr = static_cast<double>(options.sample_rate);
  Rng rng(options.seed);
  for (std::size_t k = 0; k < options.n_classes; ++k) m.classes.push_back("class" + std::to_string(k));

  for (std::size_t k = 0; k < options.n_classes; ++k) {
    const fs::path class_dir = out_dir / m.classes[k];
    fs::create_directories(class_dir, ec);
    if (ec) throw Error("dataset: cannot create " + class_dir.string());
    const double f0 = 300.0 + 60.0 * static_cast<double>(k);
    const double f1 = 600.0 + 60.0 * static_cast<double>(k);
    for (std::size_t i = 0; i < options.per_class; ++i) {
      const auto len = static_cast<std::size_t>(std::llround(rng.uniform(0.4, 1.0) * sr));
      const std::size_t start = rng.below(clip - len + 1);
      std::vector<double> audio(clip);
      for (double& x : audio) x = rng.uniform(-0.01, 0.01);
      const double dur = static_cast<double>(len) / sr;
      for (std::size_t n = 0; n < len; ++n) {
        const double tau = static_cast<double>(n) / sr;
        const double phase = 2.0 * std::numbers::pi * (f0 * tau + 0.5 * (f1 - f0) / dur * tau * tau);
        audio[start + n] += 0.5 * std::sin(phase);
      }
      char name[64];
      std::snprintf(name, sizeof name, "%s_%04zu.wav", m.classes[k].c_str(), i);
      Sample s;
      s.audio_path = (class_dir / name).lexically_normal();
      write_wav(s.audio_path, audio, options.sample_rate);
      s.label = k;
      s.t_begin = static_cast<double>(start) / sr;
      s.t_end = static_cast<double>(start + len) / sr;
      s.split = i % 10 == 8 ? Split::kVal : (i % 10 == 9 ? Split::kTest : Split::kTrain);
      m.samples.push_back(std::move(s));
    }
  }
  write_manifest(out_dir / "manifest.jsonl", m);
  return m;
}

ClassBalancedSampler::ClassBalancedSampler(const Manifest& manifest, std::uint64_t seed, Split split)
    : by_class_(manifest.classes.size()), rng_(seed) {
  for (std::size_t i = 0; i < manifest.samples.size(); ++i) {
    const Sample& s = manifest.samples[i];
    if (s.split == split) by_class_[s.label].push_back(i);
  }
  for (std::size_t c = 0; c < by_class_.size(); ++c) {
    if (by_class_[c].empty()) {
      throw Error("dataset: class '" + manifest.classes[c] + "' has no " + to_string(split) + " samples");
    }
  }
  if (by_class_.empty()) throw Error("dataset: manifest has no classes");
}

std::size_t ClassBalancedSampler::next() {
  const auto& members = by_class_[rng_.below(by_class_.size())];
  return members[rng_.below(members.size())];
}

}  // namespace spikekws
