/* Copyright 2026 The Seafuse Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "seafuse/dataio.h"
#include "seafuse/eval.h"
#include "seafuse/model.h"
#include "seafuse/training.h"
#include "test_util.h"

namespace seafuse {
namespace {

namespace fs = std::filesystem;

struct CliRun {
  int code = -1;
  std::string output;
};

// Runs the CLI with stdout and stderr captured to a file in `dir`.
CliRun Cli(const fs::path& dir, const std::string& args) {
  const fs::path log = dir / "cli.log";
  const std::string cmd =
      std::string(SEAFUSE_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

std::string Config() { return std::string(SEAFUSE_CONFIG_DIR) + "/toy.cfg"; }

TEST(CliTest, UsageErrorsExitTwo) {
  testing_util::TempDir dir("cli_usage");
  const CliRun none = Cli(dir.path(), "");
  EXPECT_EQ(none.code, 2);
  EXPECT_NE(none.output.find("synth"), std::string::npos);
  EXPECT_EQ(Cli(dir.path(), "synth --no-such-flag").code, 2);
  EXPECT_EQ(Cli(dir.path(), "frobnicate").code, 2);
  EXPECT_EQ(Cli(dir.path(), "--help").code, 0);
}

TEST(CliTest, FailuresExitOne) {
  testing_util::TempDir dir("cli_fail");
  const CliRun bad = Cli(
      dir.path(), "synth --set epochs=0 --out " + (dir.path() / "s").string());
  EXPECT_EQ(bad.code, 1);
  EXPECT_EQ(Cli(dir.path(), "synth --set nope=1").code, 1);
  EXPECT_EQ(
      Cli(dir.path(), "splits --data " + (dir.path() / "none").string()).code,
      1);
}

TEST(CliTest, SynthZeroFramesIsValidSequence) {
  testing_util::TempDir dir("cli_synth0");
  const fs::path out = dir.path() / "seq";
  const CliRun r = Cli(dir.path(), "synth --frames 0 --out " + out.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_TRUE(LoadSequence(out).frames.empty());
  EXPECT_TRUE(fs::exists(out / "config.txt"));
  EXPECT_NE(r.output.find("seed = 0"), std::string::npos);
}

TEST(CliTest, GradcheckPasses) {
  testing_util::TempDir dir("cli_grad");
  const CliRun r = Cli(dir.path(), "gradcheck --config " + Config());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("max relative error"), std::string::npos);
}

TEST(CliTest, TrainEvalPipeline) {
  testing_util::TempDir dir("cli_pipe");
  const std::string small =
      " --config " + Config() + " --width 32 --height 32 --seed 3";
  const fs::path data = dir.path() / "data";
  ASSERT_EQ(Cli(dir.path(), "synth" + small +
                                " --frames 10 --night-frames 4 "
                                "--out " +
                                (data / "river").string())
                .code,
            0);
  ASSERT_EQ(Cli(dir.path(), "splits --config " + Config() +
                                " --seed 3 --data " + data.string())
                .code,
            0);
  EXPECT_EQ(ReadSplits(data, SplitKind::kDayNight).test.size(), 4u);

  const fs::path model = dir.path() / "model";
  const CliRun train =
      Cli(dir.path(), "train" + small + " --epochs 2 --data " + data.string() +
                          " --out " + model.string());
  ASSERT_EQ(train.code, 0) << train.output;
  EXPECT_EQ(ReadEpochLog(model / "epoch_log.csv").size(), 2u);
  EXPECT_TRUE(fs::exists(model / "config.txt"));
  const Params params = LoadCheckpoint(model / "checkpoint.bin");
  EXPECT_EQ(params.config().width, 32);

  const fs::path report = dir.path() / "report";
  const CliRun eval =
      Cli(dir.path(), "eval --data " + data.string() + " --checkpoint " +
                          (model / "checkpoint.bin").string() + " --out " +
                          report.string());
  ASSERT_EQ(eval.code, 0) << eval.output;
  EXPECT_EQ(ReadMetricsCsv(report / "metrics.csv").size(), 2u);
  EXPECT_TRUE(fs::exists(report / "report.md"));
  EXPECT_TRUE(fs::exists(report / "radar.csv"));

  const fs::path ablation = dir.path() / "ablation";
  const CliRun ablate =
      Cli(dir.path(), "ablate --data " + data.string() + " --checkpoint " +
                          (model / "checkpoint.bin").string() + " --out " +
                          ablation.string());
  ASSERT_EQ(ablate.code, 0) << ablate.output;
  EXPECT_TRUE(fs::exists(ablation / "ablation.csv"));

  // Identical config and seed reproduce the log exactly.
  const fs::path again = dir.path() / "again";
  ASSERT_EQ(Cli(dir.path(), "train" + small + " --epochs 2 --data " +
                                data.string() + " --out " + again.string())
                .code,
            0);
  EXPECT_EQ(ReadEpochLog(again / "epoch_log.csv"),
            ReadEpochLog(model / "epoch_log.csv"));
}

TEST(CliTest, GeometryCommands) {
  testing_util::TempDir dir("cli_geo");
  const fs::path seq = dir.path() / "seq";
  ASSERT_EQ(Cli(dir.path(), "synth --frames 1 --out " + seq.string()).code, 0);
  const fs::path sparse = dir.path() / "sparse.csv";
  const CliRun project = Cli(
      dir.path(), "project --cloud " + (seq / "lidar" / "000000.bin").string() +
                      " --calib " + (seq / "calib" / "zed.txt").string() +
                      " --out " + sparse.string());
  ASSERT_EQ(project.code, 0) << project.output;
  EXPECT_FALSE(ReadSparseDepth(sparse).samples.empty());
  const fs::path depth = dir.path() / "depth.png";
  const CliRun densify =
      Cli(dir.path(), "densify --sparse " + sparse.string() + " --calib " +
                          (seq / "calib" / "zed.txt").string() +
                          " --max-controls 300 --out " + depth.string());
  ASSERT_EQ(densify.code, 0) << densify.output;
  EXPECT_EQ(LoadDepthPng(depth).width(), 64);
  const CliRun bundle =
      Cli(dir.path(), "bundle --data " + seq.string() + " --out " +
                          (dir.path() / "b.csv").string());
  EXPECT_EQ(bundle.code, 0) << bundle.output;
}

}  // namespace
}  // namespace seafuse
