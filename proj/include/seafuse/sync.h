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

#ifndef SEAFUSE_SYNC_H_
#define SEAFUSE_SYNC_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seafuse {

// Timestamps of one sensor stream in microseconds.
struct StreamIndex {
  std::string sensor_id;
  std::vector<int64_t> timestamps;
  int64_t period = 1;

  // Throws std::invalid_argument unless timestamps strictly increase and
  // the period is positive.
  void Validate() const;
};

struct NearestMatch {
  size_t index = 0;
  // sample_t - t.
  int64_t delta = 0;

  bool operator==(const NearestMatch&) const = default;
};

struct SensorMatch {
  std::string sensor_id;
  size_t index = 0;
  int64_t delta = 0;
  // |delta| < period of the sensor.
  bool valid = false;
};

struct BundleRecord {
  int64_t reference_t = 0;
  std::vector<SensorMatch> sensors;
};

// Nearest sample to t; equidistant neighbours resolve to the earlier index.
// Throws std::invalid_argument for an empty stream.
NearestMatch NearestSample(const StreamIndex& stream, int64_t t);

// One record per reference timestamp, one match per other stream.
std::vector<BundleRecord> Bundle(const StreamIndex& reference,
                                 std::span<const StreamIndex> others);

}  // namespace seafuse

#endif  // SEAFUSE_SYNC_H_
