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

#ifndef SEAFUSE_CONFIG_H_
#define SEAFUSE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "seafuse/dataio.h"
#include "seafuse/modality.h"
#include "seafuse/model.h"
#include "seafuse/training.h"

namespace seafuse {

// Merged run settings. Every field has a `key = value` spelling; see
// RunConfig::Keys().
struct RunConfig {
  uint64_t seed = 0;
  std::filesystem::path out = "out";
  std::filesystem::path data;
  std::filesystem::path checkpoint;

  SplitKind split = SplitKind::kDayNight;
  double val_ratio = 0.1;
  Variant variant = Variant::kDH;
  ModalitySet modalities = ModalitySet::All();
  double lidar_normalizer = kDefaultLidarNormalizer;
  int max_controls = 2000;

  TrainConfig train;
  ModelConfig model;
  SyntheticSceneParams synth;
  int day_frames = 0;
  int night_frames = 0;

  GradCheckOptions gradcheck;

  // Keeps width/height, the seed and the variant flags consistent across
  // the nested configs. Call after any edit.
  void Sync();
  // Throws std::invalid_argument on out-of-range settings.
  void Validate() const;

  // Canonical `key = value` text; loading it reproduces this config.
  std::string ToText() const;

  static const std::vector<std::string>& Keys();
};

// Parse failures carry the offending line (0 for command-line overrides).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& source, int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

struct ConfigLoad {
  RunConfig config;
  std::vector<std::string> warnings;
};

// Applies `text` (lines of `key = value`, `#` comments) on top of `base`.
// Duplicate keys: the last occurrence wins and a warning is recorded.
ConfigLoad ParseConfig(const std::string& text, const std::string& source,
                       RunConfig base = {});

// Reads `path` (when non-empty), then applies `overrides` in order.
ConfigLoad LoadConfig(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& overrides);

// Sets one key; throws ConfigError for unknown keys or bad values.
void SetConfigValue(RunConfig& config, const std::string& key,
                    const std::string& value, const std::string& source = "",
                    int line = 0);

}  // namespace seafuse

#endif  // SEAFUSE_CONFIG_H_
