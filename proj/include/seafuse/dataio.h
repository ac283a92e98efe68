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

#ifndef SEAFUSE_DATAIO_H_
#define SEAFUSE_DATAIO_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "seafuse/geometry.h"
#include "seafuse/image.h"
#include "seafuse/modality.h"
#include "seafuse/sync.h"

namespace seafuse {

// Normalizing distance of the LIDAR input channel, in meters.
inline constexpr double kDefaultLidarNormalizer = 100.0;

struct FrameTags {
  bool night = false;
  bool difficult = false;
  // Water body the frame was recorded on: river, lake or sea.
  std::string location = "river";

  bool operator==(const FrameTags&) const = default;
};

// One synchronized multimodal sample, aligned to the reference camera.
struct FrameBundle {
  Image rgb;      // h x w x 3, [0, 1]
  Image thermal;  // h x w x 1, [0, 1]
  Image lidar;    // h x w x 1, [0, 1]
  LabelMap labels;
  ModalitySet available = ModalitySet::All();
  int64_t timestamp = 0;
  FrameTags tags;
  // Raw returns in the LIDAR frame; the lidar channel is derived from them.
  PointCloud cloud;

  int width() const { return labels.width(); }
  int height() const { return labels.height(); }

  // Throws std::invalid_argument on mismatched dimensions, channel counts,
  // values outside [0, 1] or invalid label ids.
  void Validate() const;
};

struct CameraCalibration {
  CameraModel model;
  // Maps LIDAR-frame points into this camera's frame.
  Extrinsics lidar_to_camera;
  // Stored for rectification by external tools; never applied here.
  std::vector<double> distortion;

  bool operator==(const CameraCalibration&) const = default;
};

// Calibration of the cameras used by a sequence. The reference camera is
// the one labels and model inputs are aligned to.
struct SequenceCalibration {
  CameraCalibration reference;
  CameraCalibration thermal;

  bool operator==(const SequenceCalibration&) const = default;
};

struct GpsRecord {
  int frame = 0;
  double latitude = 0.0;
  double longitude = 0.0;
  double altitude = 0.0;
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;

  bool operator==(const GpsRecord&) const = default;
};

struct RadarPoint {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  double speed = 0.0;
  double rcs = 0.0;

  bool operator==(const RadarPoint&) const = default;
};

struct FrameEntry {
  // "<sequence>/<NNNNNN>", unique across merged manifests.
  std::string id;
  std::string sequence;
  int index = 0;
  FrameTags tags;
  int64_t timestamp = 0;
  std::filesystem::path rgb;
  std::filesystem::path thermal;
  std::filesystem::path lidar;
  std::filesystem::path radar;
  std::filesystem::path labels;
  ModalitySet available;
  bool has_radar = false;
  bool has_labels = false;

  bool operator==(const FrameEntry&) const = default;
};

struct SequenceInfo {
  std::filesystem::path directory;
  SequenceCalibration calibration;
  std::vector<GpsRecord> gps;
  std::vector<StreamIndex> streams;
};

struct DatasetManifest {
  std::map<std::string, SequenceInfo> sequences;
  std::vector<FrameEntry> frames;

  const FrameEntry& Find(const std::string& frame_id) const;
};

enum class SplitKind { kDayNight, kGeography, kSaltwater, kDifficult };

const char* SplitKindName(SplitKind kind);
SplitKind ParseSplitKind(std::string_view name);

struct SplitSpec {
  SplitKind kind = SplitKind::kDayNight;
  std::vector<std::string> train;
  std::vector<std::string> val;
  std::vector<std::string> test;

  bool operator==(const SplitSpec&) const = default;
};

// Reads one sequence directory. Throws std::runtime_error naming the
// offending file for malformed metadata or missing referenced frames.
DatasetManifest LoadSequence(const std::filesystem::path& directory);

// Reads either a single sequence or a directory of sequence directories.
DatasetManifest LoadDataset(const std::filesystem::path& directory);

// Decodes one frame. Unavailable modalities are zero images; missing labels
// are all-ignore.
FrameBundle LoadFrame(const DatasetManifest& manifest, const FrameEntry& frame,
                      double lidar_normalizer = kDefaultLidarNormalizer);

std::vector<FrameBundle> LoadFrames(
    const DatasetManifest& manifest, std::span<const std::string> frame_ids,
    double lidar_normalizer = kDefaultLidarNormalizer);

// Writes bundles in the on-disk sequence layout. The sequence name is the
// directory's file name.
void SaveSequence(std::span<const FrameBundle> bundles,
                  const SequenceCalibration& calibration,
                  const std::filesystem::path& directory);

// Uniform val sampling from the training pool at `val_ratio`; the test pool
// depends on the split kind. Deterministic in seed.
SplitSpec MakeSplits(const DatasetManifest& manifest, SplitKind kind,
                     double val_ratio, uint64_t seed);

// splits/<kind>/{train,val,test}.txt under root.
void WriteSplits(const std::filesystem::path& root, const SplitSpec& spec);
SplitSpec ReadSplits(const std::filesystem::path& root, SplitKind kind);

// Calibration text file: `fx fy cx cy width height`, `R` (row-major), `t`,
// optional `distortion`.
void WriteCalibration(const std::filesystem::path& path,
                      const CameraCalibration& calib);
CameraCalibration ReadCalibration(const std::filesystem::path& path);

// Little-endian float32 point records behind a small header.
void WritePointCloud(const std::filesystem::path& path,
                     const PointCloud& cloud);
PointCloud ReadPointCloud(const std::filesystem::path& path);
void WriteRadarCloud(const std::filesystem::path& path,
                     std::span<const RadarPoint> points);
std::vector<RadarPoint> ReadRadarCloud(const std::filesystem::path& path);

std::vector<GpsRecord> ReadGps(const std::filesystem::path& path);
void WriteGps(const std::filesystem::path& path,
              std::span<const GpsRecord> records);

// Depth in millimeters as 16-bit PNG; values beyond 65.535 m saturate.
void SaveDepthPng(const std::filesystem::path& path, const DenseDepth& depth);
DenseDepth LoadDepthPng(const std::filesystem::path& path);

// Images with 1 or 3 channels in [0, 1]. PNG is written at 16 bits.
void SaveImage(const std::filesystem::path& path, const Image& image);
Image LoadImage(const std::filesystem::path& path);
void SaveLabels(const std::filesystem::path& path, const LabelMap& labels);
LabelMap LoadLabels(const std::filesystem::path& path);

// Sparse depth as CSV rows `u,v,d`.
void WriteSparseDepth(const std::filesystem::path& path,
                      const SparseDepth& sparse);
SparseDepth ReadSparseDepth(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Synthetic scenes.

struct SyntheticSceneParams {
  int width = 64;
  int height = 64;
  int obstacles_min = 1;
  int obstacles_max = 3;
  // Horizon row as a fraction of the image height.
  double horizon_min = 0.3;
  double horizon_max = 0.5;
  bool night = false;
  // Night RGB gain and additive noise level.
  double night_alpha = 0.05;
  double noise_sigma = 0.03;
  uint64_t seed = 0;
  std::string location = "river";

  void Validate() const;
};

// Calibration of the simulated rig: a pinhole reference camera and a LIDAR
// mounted above it. Thermal is delivered already aligned to the reference.
SequenceCalibration SyntheticRig(const SyntheticSceneParams& params);

// Renders sky, shore, water and boats with exact labels. Pure in
// (params, frame_index); the night flag only alters RGB.
FrameBundle SynthesizeFrame(const SyntheticSceneParams& params,
                            int frame_index);

// `day_frames` day renders followed by `night_frames` night renders with
// consecutive frame indices starting at `first_index`.
std::vector<FrameBundle> SynthesizeSequence(const SyntheticSceneParams& params,
                                            int day_frames, int night_frames,
                                            int first_index = 0);

}  // namespace seafuse

#endif  // SEAFUSE_DATAIO_H_
