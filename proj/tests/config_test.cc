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

#include "seafuse/config.h"

#include <gtest/gtest.h>

#include <fstream>

#include "test_util.h"

namespace seafuse {
namespace {

TEST(ParseConfigTest, EmptyTextGivesDefaults) {
  const ConfigLoad load = ParseConfig("", "empty.cfg");
  EXPECT_TRUE(load.warnings.empty());
  EXPECT_EQ(load.config.ToText(), RunConfig().ToText());
  EXPECT_EQ(ParseConfig("# only a comment\n\n", "c.cfg").config.ToText(),
            RunConfig().ToText());
}

TEST(ParseConfigTest, ReadsValues) {
  const ConfigLoad load = ParseConfig(
      "seed = 42\nvariant = d  # trailing comment\nlearning_rate=0.003\n"
      "modalities = thermal,lidar\nsplit = saltwater\nchannels = 4,8\n",
      "t.cfg");
  const RunConfig& c = load.config;
  EXPECT_EQ(c.seed, 42u);
  EXPECT_EQ(c.variant, Variant::kD);
  EXPECT_EQ(c.train.learning_rate, 0.003);
  EXPECT_EQ(c.modalities, (ModalitySet{Modality::kThermal, Modality::kLidar}));
  EXPECT_EQ(c.split, SplitKind::kSaltwater);
  EXPECT_EQ(c.model.channels, (std::vector<int>{4, 8}));
  EXPECT_TRUE(c.train.double_pass);
  EXPECT_FALSE(c.train.multihead);
  EXPECT_EQ(c.train.seed, 42u);
}

TEST(ParseConfigTest, DuplicateKeyLastWins) {
  const ConfigLoad load =
      ParseConfig("epochs = 3\nseed = 1\nepochs = 7\n", "d.cfg");
  EXPECT_EQ(load.config.train.epochs, 7);
  ASSERT_EQ(load.warnings.size(), 1u);
  EXPECT_NE(load.warnings[0].find("d.cfg:3"), std::string::npos);
  EXPECT_NE(load.warnings[0].find("epochs"), std::string::npos);
}

TEST(ParseConfigTest, ErrorsCarryLineNumbers) {
  try {
    ParseConfig("seed = 1\n\nbogus_key = 3\n", "u.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 3);
    EXPECT_NE(std::string(e.what()).find("u.cfg:3"), std::string::npos);
  }
  try {
    ParseConfig("seed = 1\nepochs = many\n", "v.cfg");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(ParseConfig("no equals sign\n", "w.cfg"), ConfigError);
  EXPECT_THROW(ParseConfig("variant = triple\n", "w.cfg"), ConfigError);
}

TEST(ParseConfigTest, ToTextRoundTrips) {
  RunConfig c;
  c.seed = 9;
  c.variant = Variant::kH;
  c.val_ratio = 1.0 / 11.0;
  c.train.learning_rate = 3e-3;
  c.model.channels = {4, 8};
  c.modalities = {Modality::kRgb};
  c.synth.night_alpha = 0.05;
  c.Sync();
  const RunConfig back = ParseConfig(c.ToText(), "rt").config;
  EXPECT_EQ(back.ToText(), c.ToText());
  EXPECT_EQ(back.val_ratio, c.val_ratio);
  for (const std::string& key : RunConfig::Keys()) {
    EXPECT_NE(c.ToText().find(key + " = "), std::string::npos) << key;
  }
}

TEST(LoadConfigTest, FlagWins) {
  testing_util::TempDir dir("cfg");
  const auto path = dir.path() / "run.cfg";
  std::ofstream(path) << "epochs = 5\nbatch_size = 2\n";
  const ConfigLoad load =
      LoadConfig(path, {{"epochs", "9"}, {"width", "32"}, {"height", "32"}});
  EXPECT_EQ(load.config.train.epochs, 9);
  EXPECT_EQ(load.config.train.batch_size, 2);
  EXPECT_EQ(load.config.model.width, 32);
  EXPECT_EQ(load.config.synth.width, 32);
  EXPECT_THROW(LoadConfig(dir.path() / "absent.cfg", {}), std::runtime_error);
  EXPECT_THROW(LoadConfig("", {{"nope", "1"}}), ConfigError);
}

TEST(RunConfigTest, Validation) {
  RunConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.val_ratio = 1.5;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = RunConfig();
  c.train.batch_size = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

}  // namespace
}  // namespace seafuse
