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

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "seafuse/dataio.h"
#include "seafuse/random.h"

namespace seafuse {
namespace {

using Rgb = std::array<double, 3>;

constexpr double kCameraHeight = 2.0;  // meters above the water plane
constexpr double kMaxShoreDepth = 95.0;
constexpr uint64_t kNightStream = 0x6e69676874ull;

// Rounds to the precision of the on-disk point format. The volatile store
// keeps GCC 11 at -O3 from folding a plain float round trip away.
double FloatPrecision(double v) {
  volatile float f = static_cast<float>(v);
  return f;
}

// Smooth 1-D profile made of a few random sinusoids, roughly in [-1, 1].
struct Profile {
  std::array<double, 3> freq{};
  std::array<double, 3> phase{};
  std::array<double, 3> amp{};

  static Profile Random(Rng& rng, double base_freq) {
    Profile p;
    double total = 0.0;
    for (int i = 0; i < 3; ++i) {
      p.freq[i] = base_freq * (i + 1) * rng.Uniform(0.7, 1.3);
      p.phase[i] = rng.Uniform(0.0, 2.0 * std::numbers::pi);
      p.amp[i] = rng.Uniform(0.2, 1.0) / (i + 1);
      total += p.amp[i];
    }
    for (double& a : p.amp) a /= total;
    return p;
  }

  double operator()(double t) const {
    double v = 0.0;
    for (int i = 0; i < 3; ++i) v += amp[i] * std::sin(freq[i] * t + phase[i]);
    return v;
  }
};

struct Boat {
  double center_x = 0.0;
  int base_row = 0;
  double half_width = 0.0;
  double height = 0.0;
  double depth = 0.0;
  Rgb hull{};
  Rgb cabin{};
  double heat = 0.0;
};

double Quantize(double v, double levels) {
  return std::round(std::clamp(v, 0.0, 1.0) * levels) / levels;
}

Rgb Scale(const Rgb& c, double s) { return {c[0] * s, c[1] * s, c[2] * s}; }

Rgb Mix(const Rgb& a, const Rgb& b, double t) {
  return {a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t,
          a[2] + (b[2] - a[2]) * t};
}

double WaterDepth(const CameraModel& cam, double row, double horizon) {
  return cam.fy * kCameraHeight / std::max(row - horizon, 0.5);
}

}  // namespace

void SyntheticSceneParams::Validate() const {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("synthetic image size must be positive");
  }
  if (obstacles_min < 0 || obstacles_max < obstacles_min) {
    throw std::invalid_argument("obstacle count range is invalid");
  }
  if (!(horizon_min > 0.0 && horizon_min <= horizon_max && horizon_max < 1.0)) {
    throw std::invalid_argument("horizon range must lie inside (0, 1)");
  }
  if (!(night_alpha > 0.0 && night_alpha <= 1.0)) {
    throw std::invalid_argument("night alpha must be in (0, 1]");
  }
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("noise sigma must be non-negative");
  }
}

SequenceCalibration SyntheticRig(const SyntheticSceneParams& params) {
  CameraCalibration cam;
  cam.model.fx = cam.model.fy = 0.8 * params.width;
  cam.model.cx = (params.width - 1) / 2.0;
  cam.model.cy = (params.height - 1) / 2.0;
  cam.model.width = params.width;
  cam.model.height = params.height;
  // LIDAR axes: x forward, y left, z up; mounted 0.3 m above the camera.
  Eigen::Matrix3d r;
  r << 0, -1, 0, 0, 0, -1, 1, 0, 0;
  cam.lidar_to_camera = Extrinsics(r, Eigen::Vector3d(0.0, -0.3, 0.0));
  return {cam, cam};
}

FrameBundle SynthesizeFrame(const SyntheticSceneParams& params,
                            int frame_index) {
  params.Validate();
  const int w = params.width, h = params.height;
  const SequenceCalibration rig = SyntheticRig(params);
  const CameraModel& cam = rig.reference.model;
  const uint64_t frame_seed =
      Rng::Mix(params.seed, static_cast<uint64_t>(frame_index));
  Rng rng(frame_seed);

  // Scene layout.
  const double horizon =
      h * rng.Uniform(params.horizon_min, params.horizon_max);
  const double hill_amp = rng.Uniform(1.0, std::max(1.5, 0.12 * h));
  const double shore_base = rng.Uniform(1.0, std::max(1.5, 0.06 * h));
  const Profile hills = Profile::Random(rng, 2.0 * std::numbers::pi / w);
  const Profile beach = Profile::Random(rng, 4.0 * std::numbers::pi / w);
  std::vector<int> shore_top(w), shore_bottom(w);
  for (int x = 0; x < w; ++x) {
    const double top = horizon - hill_amp * (0.5 + 0.5 * hills(x));
    shore_top[x] = std::clamp(static_cast<int>(std::floor(top)), 1, h - 2);
    const double bottom = horizon + shore_base * (0.8 + 0.2 * beach(x));
    shore_bottom[x] = std::clamp(static_cast<int>(std::ceil(bottom)),
                                 shore_top[x] + 1, h - 1);
  }
  const int water_top =
      *std::max_element(shore_bottom.begin(), shore_bottom.end());

  static const std::array<Rgb, 5> kHulls = {
      Rgb{0.92, 0.92, 0.90}, Rgb{0.80, 0.15, 0.10}, Rgb{0.95, 0.80, 0.10},
      Rgb{0.16, 0.16, 0.20}, Rgb{0.95, 0.50, 0.10}};
  const int boat_count =
      rng.IntInRange(params.obstacles_min, params.obstacles_max);
  std::vector<Boat> boats;
  for (int i = 0; i < boat_count && water_top + 3 < h; ++i) {
    Boat b;
    b.base_row = rng.IntInRange(water_top + 3, h - 1);
    const double span = b.base_row - horizon;
    b.half_width = std::clamp(span * rng.Uniform(0.2, 0.45), 1.5, 0.18 * w);
    b.height = std::clamp(b.half_width * rng.Uniform(0.8, 1.4), 2.0,
                          static_cast<double>(b.base_row - water_top - 1));
    b.center_x = rng.Uniform(0.1 * w, 0.9 * w);
    b.depth = WaterDepth(cam, b.base_row, horizon);
    b.hull = kHulls[rng.Below(kHulls.size())];
    b.cabin = Mix(b.hull, Rgb{1.0, 1.0, 1.0}, rng.Uniform(0.2, 0.6));
    b.heat = rng.Uniform(0.72, 0.86);
    boats.push_back(b);
  }

  // Appearance.
  const double light = rng.Uniform(0.7, 1.1);
  const Rgb sky_top = {rng.Uniform(0.40, 0.50), rng.Uniform(0.58, 0.68), 0.92};
  const Rgb sky_low = {0.78, 0.84, 0.93};
  const Rgb shore_color =
      Mix(Rgb{0.24, 0.36, 0.14}, Rgb{0.42, 0.36, 0.26}, rng.Uniform());
  const Rgb water_color = {rng.Uniform(0.08, 0.14), rng.Uniform(0.24, 0.32),
                           rng.Uniform(0.32, 0.42)};
  const Profile clouds = Profile::Random(rng, 6.0 * std::numbers::pi / w);
  const Profile ripples = Profile::Random(rng, 2.0 * std::numbers::pi);
  const Profile texture = Profile::Random(rng, 1.3);
  const double shore_heat = rng.Uniform(0.45, 0.58);

  FrameBundle bundle;
  bundle.labels = LabelMap(w, h, label::kWater);
  bundle.rgb = Image(w, h, 3);
  bundle.thermal = Image(w, h, 1);
  bundle.tags.night = params.night;
  bundle.tags.location = params.location;
  bundle.timestamp = static_cast<int64_t>(frame_index) * 100000;
  Image heat(w, h, 1);
  DenseDepth depth(w, h, 1);  // 0 where the LIDAR sees nothing

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      Rgb color;
      double temp;
      uint8_t id;
      if (y < shore_top[x]) {
        id = label::kSky;
        const double t = static_cast<double>(y) / std::max(1, shore_top[x]);
        color = Mix(sky_top, sky_low, t);
        const double cloud = std::max(0.0, clouds(x + 0.7 * y)) * 0.15;
        color = Mix(color, Rgb{0.95, 0.95, 0.95}, cloud);
        temp = 0.10 + 0.04 * t;
      } else if (y < shore_bottom[x]) {
        id = label::kStaticObstacle;
        color = Scale(shore_color, 1.0 + 0.25 * texture(3.1 * x + 1.7 * y));
        temp = shore_heat + 0.06 * texture(1.3 * x - 2.1 * y);
        depth.at(x, y) = std::min(
            kMaxShoreDepth, 1.1 * WaterDepth(cam, shore_bottom[x], horizon));
      } else {
        id = label::kWater;
        const double near =
            (y - water_top) / std::max(1.0, h - water_top - 1.0);
        color = Scale(Mix(water_color, sky_low, 0.25 * (1.0 - near)),
                      1.0 + 0.12 * ripples(0.5 * x + 3.0 * y));
        temp = 0.22 + 0.03 * ripples(0.3 * x + 2.0 * y);
      }
      for (const Boat& b : boats) {
        const double dx = (x - b.center_x) / b.half_width;
        const double dy = (b.base_row - y) / b.height;
        if (y <= b.base_row && dx * dx + dy * dy <= 1.0) {
          id = label::kDynamicObstacle;
          color = dy > 0.55 ? b.cabin : b.hull;
          temp = b.heat;
          depth.at(x, y) = b.depth;
        }
      }
      bundle.labels.at(x, y) = id;
      for (int c = 0; c < 3; ++c) {
        bundle.rgb.at(x, y, c) = color[c] * light + 0.01 * rng.Normal();
      }
      heat.at(x, y) = temp;
    }
  }

  // Thermal optics are softer than the colour camera's.
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double sum = 0.0;
      int n = 0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int xx = x + dx, yy = y + dy;
          if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
          sum += heat.at(xx, yy);
          ++n;
        }
      }
      bundle.thermal.at(x, y) =
          Quantize(sum / n + 0.02 * rng.Normal(), 65535.0);
    }
  }

  // LIDAR returns from shore and boats, stored at float precision.
  const Extrinsics camera_to_lidar = rig.reference.lidar_to_camera.Inverse();
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double d = depth.at(x, y);
      if (d <= 0.0) continue;
      const Eigen::Vector3d p =
          camera_to_lidar.Apply(Backproject(x, y, d, cam));
      const double refl =
          bundle.labels.at(x, y) == label::kDynamicObstacle ? 0.6 : 0.3;
      bundle.cloud.points.push_back(
          {FloatPrecision(p.x()), FloatPrecision(p.y()), FloatPrecision(p.z()),
           FloatPrecision(refl)});
    }
  }
  bundle.lidar = LidarInputImage(
      ProjectPoints(bundle.cloud, rig.reference.lidar_to_camera, cam), cam,
      kDefaultLidarNormalizer);

  if (params.night) {
    Rng night_rng(Rng::Mix(frame_seed, kNightStream));
    for (double& v : bundle.rgb.data()) {
      v = std::clamp(v, 0.0, 1.0) * params.night_alpha +
          params.noise_sigma * night_rng.Normal();
    }
  }
  for (double& v : bundle.rgb.data()) v = Quantize(v, 255.0);
  return bundle;
}

std::vector<FrameBundle> SynthesizeSequence(const SyntheticSceneParams& params,
                                            int day_frames, int night_frames,
                                            int first_index) {
  if (day_frames < 0 || night_frames < 0) {
    throw std::invalid_argument("frame counts must be non-negative");
  }
  std::vector<FrameBundle> out;
  out.reserve(static_cast<size_t>(day_frames + night_frames));
  SyntheticSceneParams p = params;
  for (int i = 0; i < day_frames + night_frames; ++i) {
    p.night = i >= day_frames;
    out.push_back(SynthesizeFrame(p, first_index + i));
  }
  return out;
}

}  // namespace seafuse
