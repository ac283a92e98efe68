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

#include "seafuse/sync.h"

#include <algorithm>
#include <stdexcept>

namespace seafuse {

void StreamIndex::Validate() const {
  if (period <= 0) {
    throw std::invalid_argument("stream '" + sensor_id +
                                "' must have a positive period");
  }
  for (size_t i = 1; i < timestamps.size(); ++i) {
    if (timestamps[i] <= timestamps[i - 1]) {
      throw std::invalid_argument("stream '" + sensor_id +
                                  "' timestamps are not strictly increasing "
                                  "at index " +
                                  std::to_string(i));
    }
  }
}

NearestMatch NearestSample(const StreamIndex& stream, int64_t t) {
  const std::vector<int64_t>& ts = stream.timestamps;
  if (ts.empty()) {
    throw std::invalid_argument("stream '" + stream.sensor_id + "' is empty");
  }
  const auto upper = std::lower_bound(ts.begin(), ts.end(), t);
  size_t best;
  if (upper == ts.begin()) {
    best = 0;
  } else if (upper == ts.end()) {
    best = ts.size() - 1;
  } else {
    const size_t hi = static_cast<size_t>(upper - ts.begin());
    const size_t lo = hi - 1;
    // Ties go to the earlier sample.
    best = (*upper - t < t - ts[lo]) ? hi : lo;
  }
  return {best, ts[best] - t};
}

std::vector<BundleRecord> Bundle(const StreamIndex& reference,
                                 std::span<const StreamIndex> others) {
  reference.Validate();
  for (const StreamIndex& s : others) s.Validate();

  std::vector<BundleRecord> records;
  records.reserve(reference.timestamps.size());
  for (int64_t t : reference.timestamps) {
    BundleRecord record{t, {}};
    record.sensors.reserve(others.size());
    for (const StreamIndex& s : others) {
      const NearestMatch m = NearestSample(s, t);
      const int64_t abs_delta = m.delta < 0 ? -m.delta : m.delta;
      record.sensors.push_back(
          {s.sensor_id, m.index, m.delta, abs_delta < s.period});
    }
    records.push_back(std::move(record));
  }
  return records;
}

}  // namespace seafuse
