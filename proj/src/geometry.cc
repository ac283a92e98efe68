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

#include "seafuse/geometry.h"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace seafuse {
namespace {

int RoundToPixel(double coord) {
  return static_cast<int>(std::floor(coord + 0.5));
}

constexpr double kEdgeSlack = 1e-9;

// Nearest sampling covers whole pixels, [-0.5, size - 0.5). Bilinear
// sampling needs all four taps inside, [0, size - 1] up to rounding.
bool InFootprint(double u, double v, int width, int height, Sampling s) {
  if (s == Sampling::kNearest) {
    return u >= -0.5 && u < width - 0.5 && v >= -0.5 && v < height - 0.5;
  }
  return u >= -kEdgeSlack && u <= width - 1 + kEdgeSlack && v >= -kEdgeSlack &&
         v <= height - 1 + kEdgeSlack;
}

double SampleBilinear(const Image& img, double u, double v, int c) {
  const int x0 = static_cast<int>(std::floor(u));
  const int y0 = static_cast<int>(std::floor(v));
  const double ax = u - x0;
  const double ay = v - y0;
  auto clamp_x = [&](int x) { return std::clamp(x, 0, img.width() - 1); };
  auto clamp_y = [&](int y) { return std::clamp(y, 0, img.height() - 1); };
  const int xa = clamp_x(x0), xb = clamp_x(x0 + 1);
  const int ya = clamp_y(y0), yb = clamp_y(y0 + 1);
  const double top = (1.0 - ax) * img.at(xa, ya, c) + ax * img.at(xb, ya, c);
  const double bottom = (1.0 - ax) * img.at(xa, yb, c) + ax * img.at(xb, yb, c);
  return (1.0 - ay) * top + ay * bottom;
}

void CheckDepthMatches(const CameraModel& dst_cam, const DenseDepth& depth) {
  if (depth.width() != dst_cam.width || depth.height() != dst_cam.height ||
      depth.channels() != 1) {
    std::ostringstream msg;
    msg << "destination depth is " << depth.width() << "x" << depth.height()
        << "x" << depth.channels() << " but the destination camera is "
        << dst_cam.width << "x" << dst_cam.height;
    throw std::invalid_argument(msg.str());
  }
}

// Calls visit(x, y, u, v) for every destination pixel whose reprojection into
// the source camera lies in front of it and inside the sampler's footprint.
template <typename Visitor>
void ForEachReprojection(const CameraModel& src_cam, const Extrinsics& src_ext,
                         const CameraModel& dst_cam,
                         const DenseDepth& dst_depth, Sampling sampling,
                         Visitor&& visit) {
  for (int y = 0; y < dst_cam.height; ++y) {
    for (int x = 0; x < dst_cam.width; ++x) {
      const double d = dst_depth.at(x, y);
      if (!(d > 0.0) || !std::isfinite(d)) continue;
      const Eigen::Vector3d p = src_ext.Apply(Backproject(x, y, d, dst_cam));
      if (p.z() <= 0.0) continue;
      const double u = src_cam.fx * p.x() / p.z() + src_cam.cx;
      const double v = src_cam.fy * p.y() / p.z() + src_cam.cy;
      if (!InFootprint(u, v, src_cam.width, src_cam.height, sampling)) continue;
      visit(x, y, u, v);
    }
  }
}

}  // namespace

void CameraModel::Validate() const {
  std::ostringstream msg;
  if (!(fx > 0.0) || !(fy > 0.0)) {
    msg << "focal lengths must be positive (fx=" << fx << ", fy=" << fy << ")";
  } else if (width <= 0 || height <= 0) {
    msg << "image size must be positive (" << width << "x" << height << ")";
  } else if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    msg << "principal point (" << cx << ", " << cy
        << ") lies outside the image";
  } else {
    return;
  }
  throw std::invalid_argument(msg.str());
}

Extrinsics::Extrinsics()
    : rotation_(Eigen::Matrix3d::Identity()),
      translation_(Eigen::Vector3d::Zero()) {}

Extrinsics::Extrinsics(const Eigen::Matrix3d& rotation,
                       const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  const double orth_err =
      (rotation.transpose() * rotation - Eigen::Matrix3d::Identity())
          .cwiseAbs()
          .maxCoeff();
  const double det_err = std::abs(rotation.determinant() - 1.0);
  if (!(orth_err <= kRotationTolerance) || !(det_err <= kRotationTolerance)) {
    std::ostringstream msg;
    msg << "rotation is not orthonormal with unit determinant (|R^T R - I| = "
        << orth_err << ", |det R - 1| = " << det_err << ")";
    throw std::invalid_argument(msg.str());
  }
  if (!translation.allFinite()) {
    throw std::invalid_argument("translation must be finite");
  }
}

Extrinsics Extrinsics::Inverse() const {
  const Eigen::Matrix3d rt = rotation_.transpose();
  return Extrinsics(rt, -rt * translation_);
}

Extrinsics Extrinsics::operator*(const Extrinsics& other) const {
  return Extrinsics(rotation_ * other.rotation_,
                    rotation_ * other.translation_ + translation_);
}

void PointCloud::Validate() const {
  for (size_t i = 0; i < points.size(); ++i) {
    const LidarPoint& p = points[i];
    if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z) ||
        !std::isfinite(p.reflectivity)) {
      throw std::invalid_argument("point " + std::to_string(i) +
                                  " has non-finite fields");
    }
    if (p.reflectivity < 0.0) {
      throw std::invalid_argument("point " + std::to_string(i) +
                                  " has negative reflectivity");
    }
  }
}

SparseDepth ProjectPoints(const PointCloud& cloud, const Extrinsics& ext,
                          const CameraModel& cam) {
  cam.Validate();
  SparseDepth out;
  out.samples.reserve(cloud.points.size());
  for (const LidarPoint& p : cloud.points) {
    const Eigen::Vector3d q = ext.Apply(Eigen::Vector3d(p.x, p.y, p.z));
    if (!(q.z() > 0.0)) continue;
    const double u = cam.fx * q.x() / q.z() + cam.cx;
    const double v = cam.fy * q.y() / q.z() + cam.cy;
    if (!(u >= 0.0 && u < cam.width && v >= 0.0 && v < cam.height)) continue;
    out.samples.push_back({u, v, q.z()});
  }
  return out;
}

Eigen::Vector3d Backproject(double u, double v, double d,
                            const CameraModel& cam) {
  if (!(d > 0.0)) {
    throw std::invalid_argument("backprojection requires positive depth, got " +
                                std::to_string(d));
  }
  return {(u - cam.cx) * d / cam.fx, (v - cam.cy) * d / cam.fy, d};
}

DenseDepth DensifyDepth(const SparseDepth& sparse, const CameraModel& cam,
                        size_t max_controls) {
  cam.Validate();
  if (sparse.samples.empty()) {
    throw std::invalid_argument("cannot densify empty depth");
  }
  if (max_controls == 0) {
    throw std::invalid_argument("max_controls must be positive");
  }

  // Coincident samples would make the kernel block singular; keep the
  // nearest return at each position, in input order.
  std::vector<DepthSample> ordered;
  ordered.reserve(sparse.samples.size());
  std::map<std::pair<double, double>, size_t> seen;
  for (const DepthSample& s : sparse.samples) {
    if (!(s.d > 0.0) || !std::isfinite(s.d) || !std::isfinite(s.u) ||
        !std::isfinite(s.v)) {
      throw std::invalid_argument("depth samples must be finite and positive");
    }
    auto [it, inserted] = seen.try_emplace({s.u, s.v}, ordered.size());
    if (inserted) {
      ordered.push_back(s);
    } else {
      ordered[it->second].d = std::min(ordered[it->second].d, s.d);
    }
  }

  std::vector<DepthSample> controls;
  if (ordered.size() <= max_controls) {
    controls = std::move(ordered);
  } else {
    controls.reserve(max_controls);
    for (size_t i = 0; i < max_controls; ++i) {
      controls.push_back(ordered[i * ordered.size() / max_controls]);
    }
  }
  const Eigen::Index n = static_cast<Eigen::Index>(controls.size());

  Eigen::MatrixXd poly(n, 3);
  for (Eigen::Index i = 0; i < n; ++i) {
    poly(i, 0) = 1.0;
    poly(i, 1) = controls[i].u;
    poly(i, 2) = controls[i].v;
  }
  // The affine term is only unisolvent on three non-collinear sites.
  Eigen::Index poly_terms = 1;
  if (n >= 3) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(poly);
    lu.setThreshold(1e-9);
    if (lu.rank() == 3) poly_terms = 3;
  }

  const Eigen::Index size = n + poly_terms;
  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(size, size);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      system(i, j) = std::hypot(controls[i].u - controls[j].u,
                                controls[i].v - controls[j].v);
    }
    system(i, i) += kRbfRegularization;
    rhs(i) = controls[i].d;
  }
  system.block(0, n, n, poly_terms) = poly.leftCols(poly_terms);
  system.block(n, 0, poly_terms, n) = poly.leftCols(poly_terms).transpose();

  Eigen::PartialPivLU<Eigen::MatrixXd> solver(system);
  const Eigen::VectorXd coef = solver.solve(rhs);
  const double residual = (system * coef - rhs).norm();
  if (!coef.allFinite() || !(residual <= 1e-8 * std::max(1.0, rhs.norm()))) {
    std::ostringstream msg;
    msg << "RBF interpolation system is singular: " << n << " controls, "
        << poly_terms << " polynomial terms, residual " << residual;
    throw std::runtime_error(msg.str());
  }

  DenseDepth dense(cam.width, cam.height, 1);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      double value = coef(n);
      if (poly_terms == 3) value += coef(n + 1) * x + coef(n + 2) * y;
      for (Eigen::Index i = 0; i < n; ++i) {
        value += coef(i) * std::hypot(x - controls[i].u, y - controls[i].v);
      }
      dense.at(x, y) = std::max(value, kDepthFloor);
    }
  }
  return dense;
}

RemapResult RemapImage(const Image& src_img, const CameraModel& src_cam,
                       const Extrinsics& src_ext, const CameraModel& dst_cam,
                       const DenseDepth& dst_depth, Sampling sampling) {
  src_cam.Validate();
  dst_cam.Validate();
  if (src_img.width() != src_cam.width || src_img.height() != src_cam.height) {
    throw std::invalid_argument("source image does not match source camera");
  }
  CheckDepthMatches(dst_cam, dst_depth);

  RemapResult out{Image(dst_cam.width, dst_cam.height, src_img.channels()),
                  std::vector<uint8_t>(
                      static_cast<size_t>(dst_cam.width) * dst_cam.height, 0)};
  ForEachReprojection(
      src_cam, src_ext, dst_cam, dst_depth, sampling,
      [&](int x, int y, double u, double v) {
        for (int c = 0; c < src_img.channels(); ++c) {
          out.image.at(x, y, c) =
              sampling == Sampling::kNearest
                  ? src_img.at(RoundToPixel(u), RoundToPixel(v), c)
                  : SampleBilinear(src_img, u, v, c);
        }
        out.valid[static_cast<size_t>(y) * dst_cam.width + x] = 1;
      });
  return out;
}

LabelMap TransferLabels(const LabelMap& labels, const CameraModel& src_cam,
                        const Extrinsics& src_ext, const CameraModel& dst_cam,
                        const DenseDepth& dst_depth) {
  src_cam.Validate();
  dst_cam.Validate();
  if (labels.width() != src_cam.width || labels.height() != src_cam.height) {
    throw std::invalid_argument("label map does not match source camera");
  }
  CheckDepthMatches(dst_cam, dst_depth);

  LabelMap out(dst_cam.width, dst_cam.height, label::kIgnore);
  ForEachReprojection(src_cam, src_ext, dst_cam, dst_depth, Sampling::kNearest,
                      [&](int x, int y, double u, double v) {
                        out.at(x, y) =
                            labels.at(RoundToPixel(u), RoundToPixel(v));
                      });
  return out;
}

Image LidarInputImage(const SparseDepth& sparse, const CameraModel& cam,
                      double normalizer) {
  if (!(normalizer > 0.0)) {
    throw std::invalid_argument("lidar normalizer must be positive");
  }
  Image img(cam.width, cam.height, 1);
  for (const DepthSample& s : sparse.samples) {
    const int x = RoundToPixel(s.u);
    const int y = RoundToPixel(s.v);
    if (x < 0 || y < 0 || x >= cam.width || y >= cam.height) continue;
    const double value = std::clamp(s.d / normalizer, 0.0, 1.0);
    double& cell = img.at(x, y);
    if (cell == 0.0 || value < cell) cell = value;
  }
  return img;
}

}  // namespace seafuse
