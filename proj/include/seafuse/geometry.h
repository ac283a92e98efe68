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

#ifndef SEAFUSE_GEOMETRY_H_
#define SEAFUSE_GEOMETRY_H_

#include <Eigen/Core>
#include <cstddef>
#include <vector>

#include "seafuse/image.h"

namespace seafuse {

// Pinhole intrinsics of a rectified camera. Pixel (x, y) has its center at
// image coordinates (x, y).
struct CameraModel {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  // Throws std::invalid_argument when the intrinsics are malformed.
  void Validate() const;

  bool operator==(const CameraModel&) const = default;
};

// Rigid transform p' = R p + t. The rotation is checked on construction.
class Extrinsics {
 public:
  static constexpr double kRotationTolerance = 1e-9;

  // Identity transform.
  Extrinsics();

  // Throws std::invalid_argument if R is not a proper rotation within
  // kRotationTolerance.
  Extrinsics(const Eigen::Matrix3d& rotation,
             const Eigen::Vector3d& translation);

  static Extrinsics Identity() { return Extrinsics(); }

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  Eigen::Vector3d Apply(const Eigen::Vector3d& p) const {
    return rotation_ * p + translation_;
  }

  Extrinsics Inverse() const;

  // (this * other)(p) == this->Apply(other.Apply(p)).
  Extrinsics operator*(const Extrinsics& other) const;

  bool operator==(const Extrinsics&) const = default;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

struct LidarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double reflectivity = 0.0;

  bool operator==(const LidarPoint&) const = default;
};

struct PointCloud {
  std::vector<LidarPoint> points;

  // Throws std::invalid_argument on non-finite coordinates or negative
  // reflectivity.
  void Validate() const;

  bool operator==(const PointCloud&) const = default;
};

struct DepthSample {
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;

  bool operator==(const DepthSample&) const = default;
};

struct SparseDepth {
  std::vector<DepthSample> samples;
};

// Per-pixel depth in meters, stored as a single-channel image.
using DenseDepth = Image;

enum class Sampling { kBilinear, kNearest };

struct RemapResult {
  Image image;
  // One entry per destination pixel, row-major; 1 where the source was seen.
  std::vector<uint8_t> valid;
};

// Transforms each point into the camera frame and keeps those in front of the
// camera that land inside the image.
SparseDepth ProjectPoints(const PointCloud& cloud, const Extrinsics& ext,
                          const CameraModel& cam);

// Inverse pinhole model. Throws std::invalid_argument for d <= 0.
Eigen::Vector3d Backproject(double u, double v, double d,
                            const CameraModel& cam);

inline constexpr size_t kDefaultMaxControls = 2000;
inline constexpr double kDepthFloor = 1e-3;
inline constexpr double kRbfRegularization = 1e-10;

// Dense depth from scattered samples: linear-kernel RBF (phi(r) = r) with an
// affine polynomial term, fitted to at most `max_controls` strided samples
// and evaluated at every pixel center. Samples sharing a pixel position keep
// the nearest return. Fewer than three non-collinear controls fall back to a
// constant polynomial term.
//
// Throws std::invalid_argument for empty input and std::runtime_error when
// the interpolation system cannot be solved.
DenseDepth DensifyDepth(const SparseDepth& sparse, const CameraModel& cam,
                        size_t max_controls = kDefaultMaxControls);

// Warps `src_img` into the destination camera. `src_ext` maps destination
// camera coordinates into the source camera frame. Pixels that reproject
// behind the source camera or outside its image are filled with 0 and marked
// invalid. "Inside" means within half a pixel of a pixel center for nearest
// sampling and within the hull of pixel centers for bilinear sampling.
RemapResult RemapImage(const Image& src_img, const CameraModel& src_cam,
                       const Extrinsics& src_ext, const CameraModel& dst_cam,
                       const DenseDepth& dst_depth, Sampling sampling);

// Nearest-neighbour remap of class ids; invalid pixels become ignore.
LabelMap TransferLabels(const LabelMap& labels, const CameraModel& src_cam,
                        const Extrinsics& src_ext, const CameraModel& dst_cam,
                        const DenseDepth& dst_depth);

// Single-channel model input: d / normalizer (clamped to [0, 1]) splatted at
// each sample's rounded pixel, nearest return wins.
Image LidarInputImage(const SparseDepth& sparse, const CameraModel& cam,
                      double normalizer);

}  // namespace seafuse

#endif  // SEAFUSE_GEOMETRY_H_
