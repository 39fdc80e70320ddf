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

#include "spikekws/pipeline.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

#include "json.hpp"
#include "spikekws/error.hpp"
#include "spikekws/parallel.hpp"
#include "spikekws/wav.hpp"

namespace spikekws {
namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

fs::path ensure_out_dir(const RunConfig& config) {
  const fs::path dir(config.paths.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error("pipeline: cannot create output directory " + dir.string());
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("pipeline: cannot write " + path.string());
  out << text;
  if (!out) throw Error("pipeline: write failed for " + path.string());
}

ordered_json report_json(const EvalReport& r) {
  ordered_json j;
  j["threshold_c"] = r.threshold_c;
  j["n_samples"] = r.n_samples;
  j["acc_early"] = r.acc_early;
  j["acc_late"] = r.acc_late;
  j["mean_td"] = r.mean_td;
  j["delta_td"] = r.delta_td ? ordered_json(*r.delta_td) : ordered_json(nullptr);
  j["mean_spike_rate"] = r.mean_spike_rate;
  j["mean_energy"] = r.mean_energy;
  j["mean_energy_late"] = r.mean_energy_late;
  j["energy_ratio"] = r.energy_ratio;
  return j;
}

ordered_json count_json(const OpCount& c, const EnergyModel& model) {
  ordered_json j;
  j["n_mac"] = c.n_mac;
  j["n_acc"] = c.n_acc;
  j["joules"] = estimate_energy(c, model);
  j["t_stop"] = c.t_stop;
  j["convention_version"] = kOpCountConvention;
  return j;
}

std::vector<EvalInput> eval_inputs(const Corpus& corpus, const std::vector<std::size_t>& idx,
                                   const FbankConfig& features) {
  std::vector<EvalInput> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) {
    const Sample& s = corpus.manifest.samples[i];
    EvalInput in;
    in.features = &corpus.features[i];
    in.label = s.label;
    if (s.t_end) in.t_end_frame = end_time_to_frame(*s.t_end, features, corpus.features[i].num_frames());
    out.push_back(in);
  }
  return out;
}

void check_classes(const Checkpoint& ckpt, const Manifest& manifest) {
  if (ckpt.net.config.n_classes != manifest.classes.size()) {
    throw Error("pipeline: class-count mismatch: checkpoint has " + std::to_string(ckpt.net.config.n_classes) +
                " classes, manifest has " + std::to_string(manifest.classes.size()));
  }
  if (!ckpt.classes.empty() && ckpt.classes != manifest.classes) {
    throw Error("pipeline: class names in checkpoint and manifest differ");
  }
}

std::string sample_id(const Manifest& m, const RunConfig& config, std::size_t i) {
  const fs::path& p = m.samples[i].audio_path;
  fs::path base;
  if (!config.paths.manifest.empty()) {
    base = fs::path(config.paths.manifest).parent_path();
  } else {
    base = fs::path(config.paths.dataset_root);
  }
  const fs::path rel = p.lexically_relative(base.lexically_normal());
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

void print_report_row(std::ostream& os, const EvalReport& r, const char* mark) {
  char line[256];
  std::snprintf(line, sizeof line, "%s C=%.2f  Acc^t=%6.2f%%  Acc^T=%6.2f%%  t_d=%6.2f  dt_d=%s  R=%.4f  E=%.3f uJ\n",
                mark, r.threshold_c, r.acc_early, r.acc_late, r.mean_td,
                r.delta_td ? format_number(*r.delta_td).c_str() : "n/a", r.mean_spike_rate, r.mean_energy * 1e6);
  os << line;
}

}  // namespace

std::string format_number(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

Corpus load_corpus(const RunConfig& config, const FbankConfig& features, const std::vector<Split>& splits,
                   std::size_t threads) {
  Corpus c;
  if (!config.paths.manifest.empty()) {
    c.manifest = load_manifest(config.paths.manifest);
  } else if (!config.paths.dataset_root.empty()) {
    c.manifest = load_gsc(config.paths.dataset_root);
  } else {
    throw Error("pipeline: set paths.manifest or paths.dataset_root");
  }
  if (c.manifest.sample_rate != features.sample_rate) {
    throw Error("pipeline: manifest sample rate " + std::to_string(c.manifest.sample_rate) +
                " Hz differs from the feature config");
  }
  c.features.resize(c.manifest.samples.size());
  std::vector<std::size_t> wanted;
  for (std::size_t i = 0; i < c.manifest.samples.size(); ++i) {
    if (std::find(splits.begin(), splits.end(), c.manifest.samples[i].split) != splits.end()) wanted.push_back(i);
  }
  parallel_for(wanted.size(), threads, [&](std::size_t k) {
    const std::size_t i = wanted[k];
    const auto audio = load_clip(c.manifest, c.manifest.samples[i]);
    c.features[i] = compute_fbank(audio, features);
  });
  return c;
}

TrainOutcome run_train(const RunConfig& config, std::ostream* log) {
  config.validate();
  const fs::path out_dir = ensure_out_dir(config);
  const std::size_t threads = config.train.threads;
  const Corpus corpus = load_corpus(config, config.features, {Split::kTrain, Split::kVal}, threads);
  if (corpus.manifest.classes.size() != config.network.n_classes) {
    throw Error("pipeline: class-count mismatch: network.n_classes is " + std::to_string(config.network.n_classes) +
                " but the dataset has " + std::to_string(corpus.manifest.classes.size()) + " classes");
  }
  std::vector<TrainExample> train_set, val_set;
  std::vector<const FeatureMatrix*> train_feats;
  for (std::size_t i = 0; i < corpus.manifest.samples.size(); ++i) {
    const Sample& s = corpus.manifest.samples[i];
    if (s.split == Split::kTrain) {
      train_set.push_back({&corpus.features[i], s.label});
      train_feats.push_back(&corpus.features[i]);
    } else if (s.split == Split::kVal) {
      val_set.push_back({&corpus.features[i], s.label});
    }
  }
  if (train_set.empty()) throw Error("pipeline: dataset has no training samples");

  TrainOutcome out;
  out.checkpoint.features = config.features;
  out.checkpoint.classes = corpus.manifest.classes;
  out.checkpoint.net = Network::init(config.network, config.seed);
  if (config.features.normalize) out.checkpoint.net.input_norm = compute_feature_stats(train_feats);

  std::ofstream csv(out_dir / "epochs.csv", std::ios::binary | std::ios::trunc);
  if (!csv) throw Error("pipeline: cannot write " + (out_dir / "epochs.csv").string());
  csv << "epoch,train_loss,val_acc_late,val_acc_early,mean_spike_rate\n";
  if (log) {
    *log << "training " << format_thousands(parameter_count(config.network)) << " parameters on "
         << train_set.size() << " samples (" << val_set.size() << " validation), loss "
         << to_string(config.train.loss) << "\n";
  }
  auto on_epoch = [&](const EpochMetrics& m) {
    csv << m.epoch << ',' << format_number(m.train_loss) << ',' << format_number(m.val_acc_late) << ','
        << format_number(m.val_acc_early) << ',' << format_number(m.mean_spike_rate) << '\n';
    csv.flush();
    if (log) {
      char line[160];
      std::snprintf(line, sizeof line, "epoch %3zu  loss %.4f  val Acc^T %6.2f%%  val Acc^t %6.2f%%  rate %.4f\n",
                    m.epoch, m.train_loss, m.val_acc_late, m.val_acc_early, m.mean_spike_rate);
      *log << line << std::flush;
    }
  };
  out.history = train(out.checkpoint.net, train_set, val_set, config.train, config.decision, on_epoch);
  save_checkpoint(out_dir / "checkpoint.json", out.checkpoint);
  write_text(out_dir / "config.toml", to_toml(config));
  return out;
}

EvalOutcome run_eval(const RunConfig& config, const Checkpoint& checkpoint, const EvalOptions& options,
                     std::ostream* log) {
  const fs::path out_dir = ensure_out_dir(config);
  const std::size_t threads = config.train.threads;
  std::vector<Split> splits{Split::kTest};
  if (options.sweep) splits.push_back(Split::kVal);
  const Corpus corpus = load_corpus(config, checkpoint.features, splits, threads);
  check_classes(checkpoint, corpus.manifest);

  EvalOutcome out;
  out.test_indices = corpus.manifest.indices(Split::kTest);
  if (out.test_indices.empty()) throw Error("pipeline: manifest has no test samples");
  const auto test_inputs = eval_inputs(corpus, out.test_indices, checkpoint.features);
  out.test_runs = run_all(checkpoint.net, test_inputs, threads);

  const std::size_t min_t = config.decision.min_timestep;
  out.threshold_c = options.threshold.value_or(config.decision.threshold_c);
  ordered_json doc;
  if (options.sweep) {
    const auto val_idx = corpus.manifest.indices(Split::kVal);
    if (val_idx.empty()) throw Error("pipeline: threshold sweep needs validation samples");
    const auto val_inputs = eval_inputs(corpus, val_idx, checkpoint.features);
    const auto val_runs = run_all(checkpoint.net, val_inputs, threads);
    const auto grid = default_threshold_grid();
    out.sweep = sweep_threshold(checkpoint.net.config, val_runs, grid, min_t, config.energy);
    out.threshold_c = grid[out.sweep->selected];
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
      out.sweep_test.push_back(
          summarize(checkpoint.net.config, out.test_runs, DecisionConfig{grid[i], min_t}, config.energy));
      ordered_json row;
      row["threshold_c"] = grid[i];
      row["selected"] = i == out.sweep->selected;
      row["selectable"] = true;
      row["validation"] = report_json(out.sweep->rows[i]);
      row["test"] = report_json(out.sweep_test.back());
      rows.push_back(row);
    }
    // C = 1 never fires early; listed as the late-decision reference only.
    const DecisionConfig never{1.0, min_t};
    ordered_json row;
    row["threshold_c"] = 1.0;
    row["selected"] = false;
    row["selectable"] = false;
    row["validation"] = report_json(summarize(checkpoint.net.config, val_runs, never, config.energy));
    row["test"] = report_json(summarize(checkpoint.net.config, out.test_runs, never, config.energy));
    rows.push_back(row);
    doc["threshold_selection"] = "sweep";
    doc["sweep"] = rows;
  } else {
    doc["threshold_selection"] = "fixed";
  }
  const DecisionConfig chosen{out.threshold_c, min_t};
  out.test = summarize(checkpoint.net.config, out.test_runs, chosen, config.energy);
  doc["selected_threshold"] = out.threshold_c;
  doc["min_timestep"] = min_t;
  doc["test"] = report_json(out.test);
  doc["energy_convention_version"] = kOpCountConvention;
  write_text(out_dir / "eval.json", doc.dump(2) + "\n");

  std::string csv = "sample_id,label,predicted,t_d,t_end_frame,cs_at_td\n";
  for (std::size_t k = 0; k < out.test_runs.size(); ++k) {
    const SampleRun& run = out.test_runs[k];
    const std::size_t td = decision_step(run, chosen);
    csv += sample_id(corpus.manifest, config, out.test_indices[k]) + ',' + corpus.manifest.classes[run.label] + ',' +
           corpus.manifest.classes[run.prediction[td - 1]] + ',' + std::to_string(td) + ',' +
           (run.t_end_frame ? std::to_string(*run.t_end_frame) : std::string()) + ',' +
           format_number(run.confidence[td - 1]) + '\n';
  }
  write_text(out_dir / "per_sample.csv", csv);

  if (log) {
    if (out.sweep) {
      *log << "threshold sweep (validation split):\n";
      for (std::size_t i = 0; i < out.sweep->rows.size(); ++i) {
        print_report_row(*log, out.sweep->rows[i], i == out.sweep->selected ? "*" : " ");
      }
    }
    *log << "test split (" << out.test.n_samples << " samples):\n";
    print_report_row(*log, out.test, " ");
  }
  return out;
}

StreamOutcome run_stream(const Checkpoint& checkpoint, const fs::path& wav, const DecisionConfig& decision,
                         const EnergyModel& energy, const std::optional<fs::path>& trace_path) {
  AudioFrameSource source(read_wav(wav, checkpoint.features.sample_rate), checkpoint.features);
  StreamOutcome out;
  out.outcome = decide_stream(checkpoint.net, source, decision);
  const DecisionOutcome& d = out.outcome;
  out.label = checkpoint.classes.empty() ? std::to_string(d.predicted) : checkpoint.classes[d.predicted];
  const OpCount ops = count_ops(checkpoint.net.config, d.spike_counts, d.t_d);
  ordered_json j;
  j["predicted"] = out.label;
  j["predicted_index"] = d.predicted;
  j["t_d"] = d.t_d;
  j["total_frames"] = d.total_frames;
  j["early"] = d.early;
  j["confidence"] = d.confidence_trace.back();
  j["threshold_c"] = decision.threshold_c;
  j["spike_counts_until_td"] = d.spike_counts_until_td;
  j["energy"] = count_json(ops, energy);
  out.json = j.dump();

  if (trace_path) {
    const auto rate = spike_rate_trace(checkpoint.net.config, d.spike_counts);
    std::string csv = "t,cs,spike_rate\n";
    for (std::size_t t = 0; t < d.t_d; ++t) {
      csv += std::to_string(t + 1) + ',' + format_number(d.confidence_trace[t]) + ',' + format_number(rate[t]) + '\n';
    }
    write_text(*trace_path, csv);
  }
  return out;
}

std::string run_energy_report(const RunConfig& config, const Checkpoint& checkpoint, const DecisionConfig& decision,
                              const std::optional<fs::path>& wav) {
  decision.validate();
  const fs::path out_dir = ensure_out_dir(config);
  const NetworkConfig& net_cfg = checkpoint.net.config;
  ordered_json doc;
  doc["threshold_c"] = decision.threshold_c;
  if (wav) {
    const auto audio = read_wav(*wav, checkpoint.features.sample_rate);
    const FeatureMatrix feats = compute_fbank(audio, checkpoint.features);
    const SampleRun run = run_sample(checkpoint.net, feats, 0);
    const std::size_t td = decision_step(run, decision);
    const std::size_t steps = run.confidence.size();
    doc["source"] = wav->generic_string();
    doc["early"] = count_json(count_ops(net_cfg, run.spike_counts, td), config.energy);
    doc["late"] = count_json(count_ops(net_cfg, run.spike_counts, steps), config.energy);
    const auto rate = spike_rate_trace(net_cfg, run.spike_counts);
    std::string csv = "t,rate\n";
    for (std::size_t t = 0; t < rate.size(); ++t) csv += std::to_string(t + 1) + ',' + format_number(rate[t]) + '\n';
    write_text(out_dir / "spike_rate.csv", csv);
  } else {
    const Corpus corpus = load_corpus(config, checkpoint.features, {Split::kTest}, config.train.threads);
    check_classes(checkpoint, corpus.manifest);
    const auto idx = corpus.manifest.indices(Split::kTest);
    if (idx.empty()) throw Error("pipeline: manifest has no test samples");
    const auto inputs = eval_inputs(corpus, idx, checkpoint.features);
    const auto runs = run_all(checkpoint.net, inputs, config.train.threads);
    const EvalReport r = summarize(net_cfg, runs, decision, config.energy);
    OpCount early_total, late_total;
    for (const SampleRun& run : runs) {
      const OpCount e = count_ops(net_cfg, run.spike_counts, decision_step(run, decision));
      const OpCount l = count_ops(net_cfg, run.spike_counts, run.confidence.size());
      early_total.n_mac += e.n_mac;
      early_total.n_acc += e.n_acc;
      early_total.t_stop += e.t_stop;
      late_total.n_mac += l.n_mac;
      late_total.n_acc += l.n_acc;
      late_total.t_stop += l.t_stop;
    }
    const double n = static_cast<double>(runs.size());
    auto mean_json = [&](const OpCount& c) {
      ordered_json j;
      j["n_mac"] = static_cast<double>(c.n_mac) / n;
      j["n_acc"] = static_cast<double>(c.n_acc) / n;
      j["joules"] = estimate_energy(c, config.energy) / n;
      j["t_stop"] = static_cast<double>(c.t_stop) / n;
      j["convention_version"] = kOpCountConvention;
      return j;
    };
    doc["source"] = "test split";
    doc["n_samples"] = runs.size();
    doc["early"] = mean_json(early_total);
    doc["late"] = mean_json(late_total);
    doc["energy_ratio"] = r.energy_ratio;
  }
  const std::string text = doc.dump(2) + "\n";
  write_text(out_dir / "energy.json", text);
  return text;
}

Manifest run_dataset_gen(const RunConfig& config) {
  SynthOptions opts;
  opts.n_classes = config.dataset_gen.n_classes;
  opts.per_class = config.dataset_gen.per_class;
  opts.seed = config.seed;
  opts.sample_rate = config.features.sample_rate;
  return synth_dataset(opts, config.paths.out_dir);
}

}  // namespace spikekws
