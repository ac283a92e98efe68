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

#ifndef SEAFUSE_TESTS_TEST_UTIL_H_
#define SEAFUSE_TESTS_TEST_UTIL_H_

#include <unistd.h>

#include <Eigen/Geometry>
#include <filesystem>
#include <string>

#include "seafuse/dataio.h"
#include "seafuse/geometry.h"
#include "seafuse/image.h"
#include "seafuse/random.h"

namespace seafuse {
namespace testing_util {

// fx = fy = 100, principal point (64, 64), 128 x 128.
inline CameraModel TestCamera() {
  CameraModel cam;
  cam.fx = cam.fy = 100.0;
  cam.cx = cam.cy = 64.0;
  cam.width = cam.height = 128;
  return cam;
}

inline Eigen::Matrix3d RandomRotation(Rng& rng, double max_angle) {
  Eigen::Vector3d axis(rng.Normal(), rng.Normal(), rng.Normal());
  axis.normalize();
  return Eigen::AngleAxisd(rng.Uniform(-max_angle, max_angle), axis)
      .toRotationMatrix();
}

inline Image RandomImage(Rng& rng, int w, int h, int c) {
  Image img(w, h, c);
  for (double& v : img.data()) v = rng.Uniform();
  return img;
}

inline LabelMap RandomLabels(Rng& rng, int w, int h, bool with_ignore) {
  LabelMap labels(w, h, 0);
  for (uint8_t& id : labels.ids()) {
    const int r = rng.IntInRange(0, with_ignore ? 4 : 3);
    id = r == 4 ? label::kIgnore : static_cast<uint8_t>(r);
  }
  return labels;
}

inline FrameBundle RandomBundle(Rng& rng, int w, int h) {
  FrameBundle b;
  b.rgb = RandomImage(rng, w, h, 3);
  b.thermal = RandomImage(rng, w, h, 1);
  b.lidar = RandomImage(rng, w, h, 1);
  b.labels = RandomLabels(rng, w, h, true);
  return b;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("seafuse_" + tag + "_" + std::to_string(::getpid()) + "_" +
             std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_util
}  // namespace seafuse

#endif  // SEAFUSE_TESTS_TEST_UTIL_H_
