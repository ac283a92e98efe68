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

#include "seafuse/modality.h"

#include <bit>
#include <stdexcept>

namespace seafuse {

const char* ModalityName(Modality m) {
  switch (m) {
    case Modality::kRgb:
      return "rgb";
    case Modality::kThermal:
      return "thermal";
    case Modality::kLidar:
      return "lidar";
  }
  return "unknown";
}

Modality ParseModality(std::string_view name) {
  for (Modality m : kAllModalities) {
    if (name == ModalityName(m)) return m;
  }
  throw std::invalid_argument("unknown modality '" + std::string(name) +
                              "' (expected rgb, thermal or lidar)");
}

int ModalitySet::size() const { return std::popcount(bits_); }

std::string ModalitySet::ToString() const {
  std::string out;
  for (Modality m : kAllModalities) {
    if (!Contains(m)) continue;
    if (!out.empty()) out += ',';
    out += ModalityName(m);
  }
  return out;
}

ModalitySet ModalitySet::Parse(std::string_view text) {
  ModalitySet set;
  while (!text.empty()) {
    const size_t comma = text.find(',');
    std::string_view item = text.substr(0, comma);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (!item.empty()) set.Insert(ParseModality(item));
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return set;
}

}  // namespace seafuse
