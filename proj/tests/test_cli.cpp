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


#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"
#include "spikekws/dataset.hpp"
#include "test_util.hpp"

namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Result run_cli(const testing_util::TempDir& dir, const std::string& args) {
  const fs::path out = dir.path() / "stdout.txt", err = dir.path() / "stderr.txt";
  const std::string cmd = std::string(SPIKEKWS_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

TEST(Cli, MissingManifestIsReportedAsJson) {
  testing_util::TempDir dir;
  write(dir.path() / "run.toml", "[paths]\nmanifest = \"/no/such/dir/m.jsonl\"\nout_dir = \"" +
                                     (dir.path() / "out").string() + "\"\n");
  const Result r = run_cli(dir, "train --config " + (dir.path() / "run.toml").string());
  EXPECT_NE(r.code, 0);
  ASSERT_EQ(count_lines(r.err), 1u) << r.err;
  const auto j = nlohmann::json::parse(r.err);
  EXPECT_EQ(j.at("command"), "train");
  EXPECT_NE(j.at("error").get<std::string>().find("/no/such/dir/m.jsonl"), std::string::npos);
}

TEST(Cli, UnknownSubcommandFails) {
  testing_util::TempDir dir;
  EXPECT_NE(run_cli(dir, "fly").code, 0);
  EXPECT_NE(run_cli(dir, "").code, 0);
}

class CliPipeline : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new testing_util::TempDir();
    const fs::path root = dir_->path();
    write(root / "run.toml", "seed = 3\n"
                             "[features]\nnormalize = true\n"
                             "[network]\nhidden_sizes = [24]\nn_classes = 4\n"
                             "[train]\nepochs = 25\nbatch_size = 16\nlearning_rate = 0.005\nthreads = 1\n"
                             "[dataset_gen]\nn_classes = 4\nper_class = 30\n"
                             "[paths]\nmanifest = \"" + (root / "data/manifest.jsonl").string() + "\"\n" +
                             "out_dir = \"" + (root / "out").string() + "\"\n");
    gen_ = run_cli(*dir_, "dataset-gen --config " + (root / "run.toml").string() + " --out-dir " +
                              (root / "data").string());
    train_ = run_cli(*dir_, "train --config " + (root / "run.toml").string());
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path root() { return dir_->path(); }
  static std::string config() { return " --config " + (root() / "run.toml").string(); }
  static fs::path class3_test_clip() {
    const auto m = spikekws::load_manifest(root() / "data/manifest.jsonl");
    for (std::size_t i : m.indices(spikekws::Split::kTest)) {
      if (m.samples[i].label == 3) return m.samples[i].audio_path;
    }
    return {};
  }

  static testing_util::TempDir* dir_;
  static Result gen_, train_;
};

testing_util::TempDir* CliPipeline::dir_ = nullptr;
Result CliPipeline::gen_;
Result CliPipeline::train_;

TEST_F(CliPipeline, TrainWritesCheckpointCsvAndConfigEcho) {
  ASSERT_EQ(gen_.code, 0) << gen_.err;
  ASSERT_EQ(train_.code, 0) << train_.err;
  EXPECT_TRUE(fs::exists(root() / "out/checkpoint.json"));
  const std::string csv = slurp(root() / "out/epochs.csv");
  EXPECT_EQ(count_lines(csv), 26u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "epoch,train_loss,val_acc_late,val_acc_early,mean_spike_rate");
  EXPECT_TRUE(fs::exists(root() / "out/config.toml"));
}

TEST_F(CliPipeline, StreamPredictsClassAndStopsAtTd) {
  ASSERT_EQ(train_.code, 0) << train_.err;
  const fs::path clip = class3_test_clip();
  ASSERT_FALSE(clip.empty());
  const Result r = run_cli(*dir_, "stream" + config() + " --wav " + clip.string() + " --threshold 0.9 --trace");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j.at("predicted"), "class3");
  const std::size_t td = j.at("t_d");
  EXPECT_EQ(count_lines(slurp(root() / "out/trace.csv")), td + 1);

  const Result late = run_cli(*dir_, "stream" + config() + " --wav " + clip.string() + " --threshold 1.0");
  ASSERT_EQ(late.code, 0) << late.err;
  EXPECT_EQ(nlohmann::json::parse(late.out).at("t_d"), 98);
}

TEST_F(CliPipeline, StreamRejectsMalformedWav) {
  write(root() / "bad.wav", "RIFF....WAVEjunk");
  const Result r = run_cli(*dir_, "stream" + config() + " --wav " + (root() / "bad.wav").string());
  EXPECT_NE(r.code, 0);
  EXPECT_EQ(nlohmann::json::parse(r.err).at("command"), "stream");
}

TEST_F(CliPipeline, EvalSweepMarksSelectionAndDegenerateRow) {
  ASSERT_EQ(train_.code, 0) << train_.err;
  const Result r = run_cli(*dir_, "eval" + config() + " --sweep");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(root() / "out/eval.json"));
  const auto& rows = j.at("sweep");
  int selected = 0;
  double prev_td = 0.0;
  for (const auto& row : rows) {
    selected += row.at("selected").get<bool>();
    const double td = row.at("test").at("mean_td");
    EXPECT_GE(td, prev_td);
    prev_td = td;
  }
  EXPECT_EQ(selected, 1);
  const auto& last = rows.back();
  EXPECT_EQ(last.at("threshold_c"), 1.0);
  EXPECT_EQ(last.at("test").at("acc_early"), last.at("test").at("acc_late"));
  EXPECT_EQ(last.at("test").at("mean_td"), 98.0);
  const std::string csv = slurp(root() / "out/per_sample.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "sample_id,label,predicted,t_d,t_end_frame,cs_at_td");
  EXPECT_EQ(count_lines(csv), j.at("test").at("n_samples").get<std::size_t>() + 1);
}

TEST_F(CliPipeline, EnergyReport) {
  ASSERT_EQ(train_.code, 0) << train_.err;
  const Result r = run_cli(*dir_, "energy-report" + config() + " --threshold 0.9");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(slurp(root() / "out/energy.json"));
  EXPECT_LE(j.at("early").at("joules").get<double>(), j.at("late").at("joules").get<double>());
  const Result one = run_cli(*dir_, "energy-report" + config() + " --wav " + class3_test_clip().string());
  ASSERT_EQ(one.code, 0) << one.err;
  EXPECT_TRUE(fs::exists(root() / "out/spike_rate.csv"));
}

TEST_F(CliPipeline, LossChoiceChangesTraining) {
  ASSERT_EQ(gen_.code, 0) << gen_.err;
  const fs::path root_dir = root();
  const std::string base = slurp(root_dir / "run.toml");
  std::string tet = base;
  tet.replace(tet.find("[train]\n"), 8, "[train]\nloss = \"tet\"\n");
  tet.replace(tet.find("epochs = 25"), 11, "epochs = 3");
  tet.replace(tet.find(root_dir.string() + "/out"), (root_dir.string() + "/out").size(), (root_dir / "tet").string());
  std::string ct = tet;
  ct.replace(ct.find("loss = \"tet\""), 12, "loss = \"ct\"");
  ct.replace(ct.find((root_dir / "tet").string()), (root_dir / "tet").string().size(), (root_dir / "ct").string());
  write(root_dir / "tet.toml", tet);
  write(root_dir / "ct.toml", ct);
  ASSERT_EQ(run_cli(*dir_, "train --config " + (root_dir / "tet.toml").string()).code, 0);
  ASSERT_EQ(run_cli(*dir_, "train --config " + (root_dir / "ct.toml").string()).code, 0);
  EXPECT_NE(slurp(root_dir / "tet/epochs.csv"), slurp(root_dir / "ct/epochs.csv"));
  EXPECT_NE(slurp(root_dir / "tet/checkpoint.json"), slurp(root_dir / "ct/checkpoint.json"));
}

}  // namespace
