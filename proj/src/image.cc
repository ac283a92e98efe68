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

#include "seafuse/image.h"

#include <stdexcept>

namespace seafuse {
namespace label {

bool IsValidId(uint8_t id) { return id < kNumClasses || id == kIgnore; }

const char* ClassName(int id) {
  switch (id) {
    case kSky:
      return "sky";
    case kWater:
      return "water";
    case kStaticObstacle:
      return "static_obstacle";
    case kDynamicObstacle:
      return "dynamic_obstacle";
    case kIgnore:
      return "ignore";
    default:
      return "unknown";
  }
}

}  // namespace label

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
  if (width < 0 || height < 0 || channels < 0) {
    throw std::invalid_argument("image dimensions must be non-negative");
  }
  data_.assign(static_cast<size_t>(width) * height * channels, fill);
}

LabelMap::LabelMap(int width, int height, uint8_t fill)
    : width_(width), height_(height) {
  if (width < 0 || height < 0) {
    throw std::invalid_argument("label map dimensions must be non-negative");
  }
  ids_.assign(static_cast<size_t>(width) * height, fill);
}

void LabelMap::Validate() const {
  for (size_t i = 0; i < ids_.size(); ++i) {
    if (!label::IsValidId(ids_[i])) {
      throw std::invalid_argument("label id " + std::to_string(ids_[i]) +
                                  " at index " + std::to_string(i) +
                                  " is outside the class scheme");
    }
  }
}

}  // namespace seafuse
