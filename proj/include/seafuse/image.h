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

#ifndef SEAFUSE_IMAGE_H_
#define SEAFUSE_IMAGE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace seafuse {

// Semantic class ids. The ignore id marks pixels excluded from losses and
// metrics (e.g. parts of the recording vessel).
namespace label {
inline constexpr uint8_t kSky = 0;
inline constexpr uint8_t kWater = 1;
inline constexpr uint8_t kStaticObstacle = 2;
inline constexpr uint8_t kDynamicObstacle = 3;
inline constexpr uint8_t kIgnore = 255;
inline constexpr int kNumClasses = 4;

bool IsValidId(uint8_t id);
const char* ClassName(int id);
}  // namespace label

// Dense row-major image with interleaved channels, stored as doubles.
class Image {
 public:
  Image() = default;
  Image(int width, int height, int channels, double fill = 0.0);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  bool empty() const { return data_.empty(); }

  double& at(int x, int y, int c = 0) {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }
  double at(int x, int y, int c = 0) const {
    return data_[(static_cast<size_t>(y) * width_ + x) * channels_ + c];
  }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  bool SameShape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_ &&
           channels_ == other.channels_;
  }

  bool operator==(const Image& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<double> data_;
};

// Per-pixel class ids.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int width, int height, uint8_t fill = label::kIgnore);

  int width() const { return width_; }
  int height() const { return height_; }
  size_t size() const { return ids_.size(); }

  uint8_t& at(int x, int y) {
    return ids_[static_cast<size_t>(y) * width_ + x];
  }
  uint8_t at(int x, int y) const {
    return ids_[static_cast<size_t>(y) * width_ + x];
  }

  std::span<uint8_t> ids() { return ids_; }
  std::span<const uint8_t> ids() const { return ids_; }

  // Throws std::invalid_argument if any id is outside the class scheme.
  void Validate() const;

  bool operator==(const LabelMap& other) const = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> ids_;
};

}  // namespace seafuse

#endif  // SEAFUSE_IMAGE_H_
