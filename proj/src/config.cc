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

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace seafuse {
namespace {

struct KeySpec {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string Trim(const std::string& s) {
  const size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

template <typename T>
T ParseNumber(const std::string& text) {
  T value{};
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw std::invalid_argument("cannot parse '" + text + "' as a number");
  }
  return value;
}

template <typename T>
std::string Format(T value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

std::vector<int> ParseIntList(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ','))
    out.push_back(ParseNumber<int>(Trim(item)));
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::string FormatIntList(const std::vector<int>& v) {
  std::string out;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

#define SEAFUSE_NUMBER_KEY(key, type, field)                     \
  KeySpec {                                                      \
    key,                                                         \
        [](RunConfig& c, const std::string& v) {                 \
          c.field = ParseNumber<type>(v);                        \
        },                                                       \
        [](const RunConfig& c) { return Format<type>(c.field); } \
  }

const std::vector<KeySpec>& Registry() {
  static const std::vector<KeySpec> kKeys = {
      SEAFUSE_NUMBER_KEY("seed", uint64_t, seed),
      {"out", [](RunConfig& c, const std::string& v) { c.out = v; },
       [](const RunConfig& c) { return c.out.string(); }},
      {"data", [](RunConfig& c, const std::string& v) { c.data = v; },
       [](const RunConfig& c) { return c.data.string(); }},
      {"checkpoint",
       [](RunConfig& c, const std::string& v) { c.checkpoint = v; },
       [](const RunConfig& c) { return c.checkpoint.string(); }},
      {"split",
       [](RunConfig& c, const std::string& v) { c.split = ParseSplitKind(v); },
       [](const RunConfig& c) { return std::string(SplitKindName(c.split)); }},
      SEAFUSE_NUMBER_KEY("val_ratio", double, val_ratio),
      {"variant",
       [](RunConfig& c, const std::string& v) { c.variant = ParseVariant(v); },
       [](const RunConfig& c) { return std::string(VariantName(c.variant)); }},
      {"modalities",
       [](RunConfig& c, const std::string& v) {
         c.modalities = ModalitySet::Parse(v);
       },
       [](const RunConfig& c) { return c.modalities.ToString(); }},
      SEAFUSE_NUMBER_KEY("lidar_normalizer", double, lidar_normalizer),
      SEAFUSE_NUMBER_KEY("max_controls", int, max_controls),
      SEAFUSE_NUMBER_KEY("learning_rate", double, train.learning_rate),
      SEAFUSE_NUMBER_KEY("epochs", int, train.epochs),
      SEAFUSE_NUMBER_KEY("batch_size", int, train.batch_size),
      {"optimizer",
       [](RunConfig& c, const std::string& v) {
         if (v == "adam") {
           c.train.optimizer = Optimizer::kAdam;
         } else if (v == "sgd") {
           c.train.optimizer = Optimizer::kSgd;
         } else {
           throw std::invalid_argument("unknown optimizer '" + v +
                                       "' (expected adam or sgd)");
         }
       },
       [](const RunConfig& c) {
         return std::string(c.train.optimizer == Optimizer::kAdam ? "adam"
                                                                  : "sgd");
       }},
      {"channels",
       [](RunConfig& c, const std::string& v) {
         c.model.channels = ParseIntList(v);
       },
       [](const RunConfig& c) { return FormatIntList(c.model.channels); }},
      SEAFUSE_NUMBER_KEY("width", int, synth.width),
      SEAFUSE_NUMBER_KEY("height", int, synth.height),
      SEAFUSE_NUMBER_KEY("obstacles_min", int, synth.obstacles_min),
      SEAFUSE_NUMBER_KEY("obstacles_max", int, synth.obstacles_max),
      SEAFUSE_NUMBER_KEY("horizon_min", double, synth.horizon_min),
      SEAFUSE_NUMBER_KEY("horizon_max", double, synth.horizon_max),
      SEAFUSE_NUMBER_KEY("night_alpha", double, synth.night_alpha),
      SEAFUSE_NUMBER_KEY("noise_sigma", double, synth.noise_sigma),
      {"location",
       [](RunConfig& c, const std::string& v) { c.synth.location = v; },
       [](const RunConfig& c) { return c.synth.location; }},
      SEAFUSE_NUMBER_KEY("day_frames", int, day_frames),
      SEAFUSE_NUMBER_KEY("night_frames", int, night_frames),
      SEAFUSE_NUMBER_KEY("gradcheck_eps", double, gradcheck.eps),
      SEAFUSE_NUMBER_KEY("gradcheck_samples", int, gradcheck.samples),
  };
  return kKeys;
}

#undef SEAFUSE_NUMBER_KEY

const KeySpec* FindKey(const std::string& key) {
  for (const KeySpec& k : Registry()) {
    if (key == k.name) return &k;
  }
  return nullptr;
}

}  // namespace

ConfigError::ConfigError(const std::string& source, int line,
                         const std::string& what)
    : std::runtime_error(
          (source.empty() ? std::string("config") : source) +
          (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " +
          what),
      line_(line) {}

void RunConfig::Sync() {
  model.width = synth.width;
  model.height = synth.height;
  synth.seed = seed;
  train.seed = seed;
  gradcheck.seed = seed;
  train.SetVariant(variant);
  model.multihead = train.multihead;
}

void RunConfig::Validate() const {
  if (!(val_ratio >= 0.0 && val_ratio < 1.0)) {
    throw std::invalid_argument("val_ratio must lie in [0, 1)");
  }
  if (!(lidar_normalizer > 0.0)) {
    throw std::invalid_argument("lidar_normalizer must be positive");
  }
  if (max_controls < 1)
    throw std::invalid_argument("max_controls must be >= 1");
  if (day_frames < 0 || night_frames < 0) {
    throw std::invalid_argument("frame counts must be non-negative");
  }
  if (modalities.empty()) {
    throw std::invalid_argument("modalities must name at least one input");
  }
  if (!(gradcheck.eps > 0.0) || gradcheck.samples < 1) {
    throw std::invalid_argument("gradcheck needs eps > 0 and samples >= 1");
  }
  train.Validate();
  model.Validate();
  synth.Validate();
}

std::string RunConfig::ToText() const {
  std::string text;
  for (const KeySpec& k : Registry()) {
    text += std::string(k.name) + " = " + k.get(*this) + "\n";
  }
  return text;
}

const std::vector<std::string>& RunConfig::Keys() {
  static const std::vector<std::string> kNames = [] {
    std::vector<std::string> names;
    for (const KeySpec& k : Registry()) names.emplace_back(k.name);
    return names;
  }();
  return kNames;
}

void SetConfigValue(RunConfig& config, const std::string& key,
                    const std::string& value, const std::string& source,
                    int line) {
  const KeySpec* spec = FindKey(key);
  if (spec == nullptr)
    throw ConfigError(source, line, "unknown key '" + key + "'");
  try {
    spec->set(config, value);
  } catch (const std::exception& e) {
    throw ConfigError(source, line, "key '" + key + "': " + e.what());
  }
  config.Sync();
}

ConfigLoad ParseConfig(const std::string& text, const std::string& source,
                       RunConfig base) {
  ConfigLoad result{std::move(base), {}};
  std::map<std::string, int> seen;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const size_t hash = raw.find('#');
    const std::string line = Trim(raw.substr(0, hash));
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(source, line_no, "expected 'key = value'");
    }
    const std::string key = Trim(line.substr(0, eq));
    const std::string value = Trim(line.substr(eq + 1));
    SetConfigValue(result.config, key, value, source, line_no);
    const auto [it, inserted] = seen.try_emplace(key, line_no);
    if (!inserted) {
      result.warnings.push_back(source + ":" + std::to_string(line_no) +
                                ": duplicate key '" + key + "' (line " +
                                std::to_string(it->second) + " overridden)");
      it->second = line_no;
    }
  }
  return result;
}

ConfigLoad LoadConfig(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, std::string>>& overrides) {
  ConfigLoad result;
  result.config.Sync();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path.string(), 0, "cannot open config file");
    std::ostringstream text;
    text << in.rdbuf();
    result = ParseConfig(text.str(), path.string(), result.config);
  }
  for (const auto& [key, value] : overrides) {
    SetConfigValue(result.config, key, value, "--" + key);
  }
  return result;
}

}  // namespace seafuse
