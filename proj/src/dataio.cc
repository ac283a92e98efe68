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

#include "seafuse/dataio.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>
#include <set>
#include <sstream>
#include <stdexcept>

#include "seafuse/random.h"

namespace seafuse {
namespace fs = std::filesystem;

namespace {

static_assert(std::endian::native == std::endian::little,
              "point cloud files are read and written as little-endian");

constexpr char kCloudMagic[4] = {'S', 'F', 'P', 'C'};
constexpr int kJpegQuality = 95;

const char* const kReferenceSensor = "zed";
const char* const kThermalSensor = "thermal";
const char* const kLidarSensor = "lidar";
const char* const kRadarSensor = "radar";

std::runtime_error FileError(const fs::path& path, const std::string& what) {
  return std::runtime_error(path.string() + ": " + what);
}

std::string FrameName(int index) {
  std::ostringstream name;
  name << std::setw(6) << std::setfill('0') << index;
  return name.str();
}

std::string SequenceName(const fs::path& directory) {
  fs::path normal = directory.lexically_normal();
  if (normal.filename().empty()) normal = normal.parent_path();
  return normal.filename().string();
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

// Rows of a CSV file with a required header; blank lines are skipped.
std::vector<std::vector<std::string>> ReadCsv(const fs::path& path,
                                              const std::string& header) {
  std::ifstream in(path);
  if (!in) throw FileError(path, "cannot open");
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw FileError(path, "expected header '" + header + "'");
  }
  const size_t columns = SplitCsvLine(header).size();
  std::vector<std::vector<std::string>> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = SplitCsvLine(line);
    if (fields.size() != columns) {
      throw FileError(path, "line " + std::to_string(line_no) + " has " +
                                std::to_string(fields.size()) +
                                " fields, expected " + std::to_string(columns));
    }
    rows.push_back(std::move(fields));
  }
  return rows;
}

template <typename T>
T ParseNumber(const std::string& text, const fs::path& path) {
  std::istringstream in(text);
  T value;
  if (!(in >> value) || !(in >> std::ws).eof()) {
    throw FileError(path, "cannot parse number '" + text + "'");
  }
  return value;
}

std::ofstream OpenForWrite(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError(path, "cannot open for writing");
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  return out;
}

void CheckWritten(std::ofstream& out, const fs::path& path) {
  out.flush();
  if (!out) throw FileError(path, "write failed");
}

template <typename Record, size_t kArity>
void WriteRecords(const fs::path& path, std::span<const Record> records,
                  void (*fields)(const Record&, float*)) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FileError(path, "cannot open for writing");
  out.write(kCloudMagic, sizeof(kCloudMagic));
  const uint32_t arity = kArity;
  const uint64_t count = records.size();
  out.write(reinterpret_cast<const char*>(&arity), sizeof(arity));
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  std::vector<float> row(kArity);
  for (const Record& r : records) {
    fields(r, row.data());
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  CheckWritten(out, path);
}

std::vector<float> ReadRecords(const fs::path& path, uint32_t expected_arity,
                               uint64_t* count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path, "cannot open");
  char magic[4];
  uint32_t arity = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&arity), sizeof(arity));
  in.read(reinterpret_cast<char*>(count), sizeof(*count));
  if (!in || std::memcmp(magic, kCloudMagic, sizeof(magic)) != 0) {
    throw FileError(path, "not a point cloud file");
  }
  if (arity != expected_arity) {
    throw FileError(path, "record arity " + std::to_string(arity) +
                              ", expected " + std::to_string(expected_arity));
  }
  std::vector<float> values(*count * arity);
  in.read(reinterpret_cast<char*>(values.data()),
          static_cast<std::streamsize>(values.size() * sizeof(float)));
  if (!in) throw FileError(path, "truncated point records");
  return values;
}

cv::Mat ReadMat(const fs::path& path) {
  cv::Mat mat;
  try {
    mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
  } catch (const cv::Exception& e) {
    throw FileError(path, e.what());
  }
  if (mat.empty()) throw FileError(path, "cannot decode image");
  return mat;
}

void WriteMat(const fs::path& path, const cv::Mat& mat,
              const std::vector<int>& flags = {}) {
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat, flags);
  } catch (const cv::Exception& e) {
    throw FileError(path, e.what());
  }
  if (!ok) throw FileError(path, "cannot encode image");
}

bool IsJpeg(const fs::path& path) {
  const std::string ext = path.extension().string();
  return ext == ".jpg" || ext == ".jpeg";
}

SequenceCalibration ReadSequenceCalibration(const fs::path& dir) {
  SequenceCalibration calib;
  calib.reference = ReadCalibration(dir / "calib" / "zed.txt");
  const fs::path thermal = dir / "calib" / "thermal.txt";
  calib.thermal =
      fs::exists(thermal) ? ReadCalibration(thermal) : calib.reference;
  return calib;
}

// Frame index -> timestamp per sensor, and sensor periods.
struct Timing {
  std::map<std::string, std::map<int, int64_t>> samples;
  std::map<std::string, int64_t> periods;
};

Timing ReadTiming(const fs::path& dir) {
  Timing timing;
  const fs::path ts_path = dir / "timestamps.csv";
  if (fs::exists(ts_path)) {
    for (const auto& row : ReadCsv(ts_path, "sensor_id,frame,microseconds")) {
      timing.samples[row[0]][ParseNumber<int>(row[1], ts_path)] =
          ParseNumber<int64_t>(row[2], ts_path);
    }
  }
  const fs::path sensors_path = dir / "sensors.csv";
  if (fs::exists(sensors_path)) {
    for (const auto& row : ReadCsv(sensors_path, "sensor_id,period_us")) {
      timing.periods[row[0]] = ParseNumber<int64_t>(row[1], sensors_path);
    }
  }
  return timing;
}

std::vector<StreamIndex> BuildStreams(const Timing& timing,
                                      const fs::path& dir) {
  std::vector<StreamIndex> streams;
  for (const auto& [sensor, samples] : timing.samples) {
    StreamIndex s;
    s.sensor_id = sensor;
    for (const auto& [frame, t] : samples) s.timestamps.push_back(t);
    auto period = timing.periods.find(sensor);
    if (period == timing.periods.end()) {
      throw FileError(dir / "sensors.csv", "no period for sensor " + sensor);
    }
    s.period = period->second;
    try {
      s.Validate();
    } catch (const std::invalid_argument& e) {
      throw FileError(dir / "timestamps.csv", e.what());
    }
    streams.push_back(std::move(s));
  }
  return streams;
}

std::vector<std::string> ReadIdList(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError(path, "cannot open");
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

void WriteIdList(const fs::path& path, const std::vector<std::string>& ids) {
  std::ofstream out = OpenForWrite(path);
  for (const std::string& id : ids) out << id << '\n';
  CheckWritten(out, path);
}

}  // namespace

void FrameBundle::Validate() const {
  const int w = labels.width(), h = labels.height();
  auto check = [&](const Image& img, int channels, const char* name) {
    if (img.width() != w || img.height() != h || img.channels() != channels) {
      throw std::invalid_argument(std::string(name) +
                                  " dimensions do not match the labels");
    }
    for (double v : img.data()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw std::invalid_argument(std::string(name) +
                                    " has values outside [0, 1]");
      }
    }
  };
  check(rgb, 3, "rgb");
  check(thermal, 1, "thermal");
  check(lidar, 1, "lidar");
  labels.Validate();
}

const FrameEntry& DatasetManifest::Find(const std::string& frame_id) const {
  for (const FrameEntry& f : frames) {
    if (f.id == frame_id) return f;
  }
  throw std::out_of_range("frame '" + frame_id + "' is not in the manifest");
}

const char* SplitKindName(SplitKind kind) {
  switch (kind) {
    case SplitKind::kDayNight:
      return "day-night";
    case SplitKind::kGeography:
      return "geography";
    case SplitKind::kSaltwater:
      return "saltwater";
    case SplitKind::kDifficult:
      return "difficult";
  }
  return "unknown";
}

SplitKind ParseSplitKind(std::string_view name) {
  for (SplitKind k : {SplitKind::kDayNight, SplitKind::kGeography,
                      SplitKind::kSaltwater, SplitKind::kDifficult}) {
    if (name == SplitKindName(k)) return k;
  }
  throw std::invalid_argument("unknown split kind '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Calibration, point clouds, GPS.

void WriteCalibration(const fs::path& path, const CameraCalibration& calib) {
  std::ofstream out = OpenForWrite(path);
  const CameraModel& m = calib.model;
  out << "fx " << m.fx << "\nfy " << m.fy << "\ncx " << m.cx << "\ncy " << m.cy
      << "\nwidth " << m.width << "\nheight " << m.height << "\nR";
  const Eigen::Matrix3d& r = calib.lidar_to_camera.rotation();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out << ' ' << r(i, j);
  }
  out << "\nt";
  for (int i = 0; i < 3; ++i)
    out << ' ' << calib.lidar_to_camera.translation()(i);
  out << '\n';
  if (!calib.distortion.empty()) {
    out << "distortion";
    for (double k : calib.distortion) out << ' ' << k;
    out << '\n';
  }
  CheckWritten(out, path);
}

CameraCalibration ReadCalibration(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FileError(path, "cannot open calibration file");
  std::map<std::string, std::vector<double>> fields;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream tokens(line);
    std::string key;
    if (!(tokens >> key) || key.front() == '#') continue;
    std::vector<double> values;
    std::string token;
    while (tokens >> token) {
      try {
        size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw FileError(path, "line " + std::to_string(line_no) +
                                  ": cannot parse value '" + token + "'");
      }
    }
    fields[key] = std::move(values);
  }

  auto get = [&](const std::string& key, size_t count) {
    auto it = fields.find(key);
    if (it == fields.end() || it->second.size() != count) {
      throw FileError(path, "malformed calibration: '" + key + "' needs " +
                                std::to_string(count) + " value(s)");
    }
    return it->second;
  };
  CameraCalibration calib;
  calib.model.fx = get("fx", 1)[0];
  calib.model.fy = get("fy", 1)[0];
  calib.model.cx = get("cx", 1)[0];
  calib.model.cy = get("cy", 1)[0];
  calib.model.width = static_cast<int>(get("width", 1)[0]);
  calib.model.height = static_cast<int>(get("height", 1)[0]);
  const std::vector<double> r = get("R", 9);
  const std::vector<double> t = get("t", 3);
  if (auto it = fields.find("distortion"); it != fields.end()) {
    calib.distortion = it->second;
  }
  try {
    calib.model.Validate();
    Eigen::Matrix3d rot;
    rot << r[0], r[1], r[2], r[3], r[4], r[5], r[6], r[7], r[8];
    calib.lidar_to_camera = Extrinsics(rot, Eigen::Vector3d(t[0], t[1], t[2]));
  } catch (const std::invalid_argument& e) {
    throw FileError(path, std::string("malformed calibration: ") + e.what());
  }
  return calib;
}

void WritePointCloud(const fs::path& path, const PointCloud& cloud) {
  WriteRecords<LidarPoint, 4>(path, std::span<const LidarPoint>(cloud.points),
                              [](const LidarPoint& p, float* f) {
                                f[0] = static_cast<float>(p.x);
                                f[1] = static_cast<float>(p.y);
                                f[2] = static_cast<float>(p.z);
                                f[3] = static_cast<float>(p.reflectivity);
                              });
}

PointCloud ReadPointCloud(const fs::path& path) {
  uint64_t count = 0;
  const std::vector<float> v = ReadRecords(path, 4, &count);
  PointCloud cloud;
  cloud.points.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    cloud.points.push_back(
        {v[4 * i], v[4 * i + 1], v[4 * i + 2], v[4 * i + 3]});
  }
  try {
    cloud.Validate();
  } catch (const std::invalid_argument& e) {
    throw FileError(path, e.what());
  }
  return cloud;
}

void WriteRadarCloud(const fs::path& path, std::span<const RadarPoint> points) {
  WriteRecords<RadarPoint, 5>(path, points, [](const RadarPoint& p, float* f) {
    f[0] = static_cast<float>(p.x);
    f[1] = static_cast<float>(p.y);
    f[2] = static_cast<float>(p.z);
    f[3] = static_cast<float>(p.speed);
    f[4] = static_cast<float>(p.rcs);
  });
}

std::vector<RadarPoint> ReadRadarCloud(const fs::path& path) {
  uint64_t count = 0;
  const std::vector<float> v = ReadRecords(path, 5, &count);
  std::vector<RadarPoint> points;
  points.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    const float* f = &v[5 * i];
    points.push_back({f[0], f[1], f[2], f[3], f[4]});
  }
  return points;
}

std::vector<GpsRecord> ReadGps(const fs::path& path) {
  std::vector<GpsRecord> records;
  for (const auto& row :
       ReadCsv(path, "frame,latitude,longitude,altitude,roll,pitch,yaw")) {
    GpsRecord r;
    r.frame = ParseNumber<int>(row[0], path);
    r.latitude = ParseNumber<double>(row[1], path);
    r.longitude = ParseNumber<double>(row[2], path);
    r.altitude = ParseNumber<double>(row[3], path);
    r.roll = ParseNumber<double>(row[4], path);
    r.pitch = ParseNumber<double>(row[5], path);
    r.yaw = ParseNumber<double>(row[6], path);
    records.push_back(r);
  }
  return records;
}

void WriteGps(const fs::path& path, std::span<const GpsRecord> records) {
  std::ofstream out = OpenForWrite(path);
  out << "frame,latitude,longitude,altitude,roll,pitch,yaw\n";
  for (const GpsRecord& r : records) {
    out << r.frame << ',' << r.latitude << ',' << r.longitude << ','
        << r.altitude << ',' << r.roll << ',' << r.pitch << ',' << r.yaw
        << '\n';
  }
  CheckWritten(out, path);
}

// ---------------------------------------------------------------------------
// Images.

void SaveImage(const fs::path& path, const Image& image) {
  const bool jpeg = IsJpeg(path);
  const int c = image.channels();
  if (c != 1 && c != 3) {
    throw FileError(path, "only 1- or 3-channel images can be saved");
  }
  const double scale = jpeg ? 255.0 : 65535.0;
  cv::Mat mat(image.height(), image.width(), jpeg ? CV_8UC(c) : CV_16UC(c));
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int ch = 0; ch < c; ++ch) {
        // OpenCV stores colour as BGR.
        const int dst = c == 3 ? 2 - ch : ch;
        const double v =
            std::round(std::clamp(image.at(x, y, ch), 0.0, 1.0) * scale);
        if (jpeg) {
          mat.ptr<uint8_t>(y)[x * c + dst] = static_cast<uint8_t>(v);
        } else {
          mat.ptr<uint16_t>(y)[x * c + dst] = static_cast<uint16_t>(v);
        }
      }
    }
  }
  if (jpeg) {
    WriteMat(path, mat, {cv::IMWRITE_JPEG_QUALITY, kJpegQuality});
  } else {
    WriteMat(path, mat);
  }
}

Image LoadImage(const fs::path& path) {
  const cv::Mat mat = ReadMat(path);
  const int c = mat.channels();
  if (c != 1 && c != 3) throw FileError(path, "expected 1 or 3 channels");
  double scale;
  if (mat.depth() == CV_8U) {
    scale = 255.0;
  } else if (mat.depth() == CV_16U) {
    scale = 65535.0;
  } else {
    throw FileError(path, "unsupported pixel depth");
  }
  Image image(mat.cols, mat.rows, c);
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) {
      for (int ch = 0; ch < c; ++ch) {
        const int src = c == 3 ? 2 - ch : ch;
        const double raw = mat.depth() == CV_8U
                               ? mat.ptr<uint8_t>(y)[x * c + src]
                               : mat.ptr<uint16_t>(y)[x * c + src];
        image.at(x, y, ch) = raw / scale;
      }
    }
  }
  return image;
}

void SaveLabels(const fs::path& path, const LabelMap& labels) {
  cv::Mat mat(labels.height(), labels.width(), CV_16UC1);
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      mat.ptr<uint16_t>(y)[x] = labels.at(x, y);
    }
  }
  WriteMat(path, mat);
}

LabelMap LoadLabels(const fs::path& path) {
  const cv::Mat mat = ReadMat(path);
  if (mat.channels() != 1) throw FileError(path, "labels must be 1-channel");
  LabelMap labels(mat.cols, mat.rows);
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) {
      const int id = mat.depth() == CV_16U ? mat.ptr<uint16_t>(y)[x]
                                           : mat.ptr<uint8_t>(y)[x];
      if (id > 255 || !label::IsValidId(static_cast<uint8_t>(id))) {
        throw FileError(path, "invalid class id " + std::to_string(id));
      }
      labels.at(x, y) = static_cast<uint8_t>(id);
    }
  }
  return labels;
}

void SaveDepthPng(const fs::path& path, const DenseDepth& depth) {
  if (depth.channels() != 1) throw FileError(path, "depth must be 1-channel");
  cv::Mat mat(depth.height(), depth.width(), CV_16UC1);
  for (int y = 0; y < depth.height(); ++y) {
    for (int x = 0; x < depth.width(); ++x) {
      const double mm = std::round(depth.at(x, y) * 1000.0);
      mat.ptr<uint16_t>(y)[x] =
          static_cast<uint16_t>(std::clamp(mm, 0.0, 65535.0));
    }
  }
  WriteMat(path, mat);
}

DenseDepth LoadDepthPng(const fs::path& path) {
  const cv::Mat mat = ReadMat(path);
  if (mat.channels() != 1 || mat.depth() != CV_16U) {
    throw FileError(path, "depth must be a 16-bit single-channel PNG");
  }
  DenseDepth depth(mat.cols, mat.rows, 1);
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) {
      depth.at(x, y) = mat.ptr<uint16_t>(y)[x] / 1000.0;
    }
  }
  return depth;
}

void WriteSparseDepth(const fs::path& path, const SparseDepth& sparse) {
  std::ofstream out = OpenForWrite(path);
  out << "u,v,d\n";
  for (const DepthSample& s : sparse.samples) {
    out << s.u << ',' << s.v << ',' << s.d << '\n';
  }
  CheckWritten(out, path);
}

SparseDepth ReadSparseDepth(const fs::path& path) {
  SparseDepth sparse;
  for (const auto& row : ReadCsv(path, "u,v,d")) {
    sparse.samples.push_back({ParseNumber<double>(row[0], path),
                              ParseNumber<double>(row[1], path),
                              ParseNumber<double>(row[2], path)});
  }
  return sparse;
}

// ---------------------------------------------------------------------------
// Sequences.

void SaveSequence(std::span<const FrameBundle> bundles,
                  const SequenceCalibration& calibration,
                  const fs::path& directory) {
  for (const char* sub : {"calib", "rgb", "thermal", "lidar", "labels"}) {
    std::error_code ec;
    fs::create_directories(directory / sub, ec);
    if (ec) throw FileError(directory / sub, ec.message());
  }
  WriteCalibration(directory / "calib" / "zed.txt", calibration.reference);
  WriteCalibration(directory / "calib" / "thermal.txt", calibration.thermal);

  const fs::path meta_path = directory / "meta.csv";
  const fs::path ts_path = directory / "timestamps.csv";
  std::ofstream meta = OpenForWrite(meta_path);
  std::ofstream ts = OpenForWrite(ts_path);
  meta << "frame,location,lighting,difficult\n";
  ts << "sensor_id,frame,microseconds\n";

  for (size_t i = 0; i < bundles.size(); ++i) {
    const FrameBundle& b = bundles[i];
    b.Validate();
    const int index = static_cast<int>(i);
    const std::string name = FrameName(index);
    meta << index << ',' << b.tags.location << ','
         << (b.tags.night ? "night" : "day") << ','
         << (b.tags.difficult ? 1 : 0) << '\n';
    ts << kReferenceSensor << ',' << index << ',' << b.timestamp << '\n';
    if (b.available.Contains(Modality::kRgb)) {
      SaveImage(directory / "rgb" / (name + ".jpg"), b.rgb);
    }
    if (b.available.Contains(Modality::kThermal)) {
      SaveImage(directory / "thermal" / (name + ".png"), b.thermal);
      ts << kThermalSensor << ',' << index << ',' << b.timestamp << '\n';
    }
    if (b.available.Contains(Modality::kLidar)) {
      WritePointCloud(directory / "lidar" / (name + ".bin"), b.cloud);
      ts << kLidarSensor << ',' << index << ',' << b.timestamp << '\n';
    }
    SaveLabels(directory / "labels" / (name + ".png"), b.labels);
  }
  CheckWritten(meta, meta_path);
  CheckWritten(ts, ts_path);

  const fs::path sensors_path = directory / "sensors.csv";
  std::ofstream sensors = OpenForWrite(sensors_path);
  sensors << "sensor_id,period_us\n"
          << kReferenceSensor << ",100000\n"
          << kThermalSensor << ",33333\n"
          << kLidarSensor << ",100000\n"
          << kRadarSensor << ",50000\n";
  CheckWritten(sensors, sensors_path);
  WriteGps(directory / "gps.csv", {});
}

DatasetManifest LoadSequence(const fs::path& directory) {
  const fs::path meta_path = directory / "meta.csv";
  if (!fs::exists(meta_path)) {
    throw std::runtime_error(directory.string() +
                             ": no sequence metadata found");
  }
  const std::string sequence = SequenceName(directory);

  SequenceInfo info;
  info.directory = directory;
  info.calibration = ReadSequenceCalibration(directory);
  if (fs::exists(directory / "gps.csv"))
    info.gps = ReadGps(directory / "gps.csv");
  const Timing timing = ReadTiming(directory);
  info.streams = BuildStreams(timing, directory);

  // Sync validity per sensor, keyed by reference frame index.
  std::map<std::string, std::map<int, bool>> in_sync;
  auto reference = timing.samples.find(kReferenceSensor);
  if (reference != timing.samples.end()) {
    std::vector<int> frame_of_row;
    StreamIndex ref_stream;
    std::vector<StreamIndex> others;
    for (const StreamIndex& s : info.streams) {
      if (s.sensor_id == kReferenceSensor) {
        ref_stream = s;
      } else {
        others.push_back(s);
      }
    }
    for (const auto& [frame, t] : reference->second)
      frame_of_row.push_back(frame);
    const std::vector<BundleRecord> records = Bundle(ref_stream, others);
    for (size_t r = 0; r < records.size(); ++r) {
      for (const SensorMatch& m : records[r].sensors) {
        in_sync[m.sensor_id][frame_of_row[r]] = m.valid;
      }
    }
  }
  auto synced = [&](const char* sensor, int frame) {
    auto s = in_sync.find(sensor);
    if (s == in_sync.end()) return true;
    auto f = s->second.find(frame);
    return f == s->second.end() || f->second;
  };

  DatasetManifest manifest;
  std::set<int> seen;
  for (const auto& row :
       ReadCsv(meta_path, "frame,location,lighting,difficult")) {
    FrameEntry e;
    e.index = ParseNumber<int>(row[0], meta_path);
    if (!seen.insert(e.index).second) {
      throw FileError(meta_path, "duplicate frame " + row[0]);
    }
    const std::string name = FrameName(e.index);
    e.sequence = sequence;
    e.id = sequence + "/" + name;
    e.tags.location = row[1];
    if (row[2] != "day" && row[2] != "night") {
      throw FileError(meta_path,
                      "lighting must be day or night, got '" + row[2] + "'");
    }
    e.tags.night = row[2] == "night";
    e.tags.difficult = ParseNumber<int>(row[3], meta_path) != 0;
    if (reference != timing.samples.end()) {
      auto t = reference->second.find(e.index);
      if (t != reference->second.end()) e.timestamp = t->second;
    }

    const fs::path rgb = directory / "rgb" / (name + ".jpg");
    if (!fs::exists(rgb)) throw FileError(rgb, "missing referenced frame");
    e.rgb = rgb;
    e.available.Insert(Modality::kRgb);
    if (fs::path p = directory / "thermal" / (name + ".png"); fs::exists(p)) {
      e.thermal = p;
      if (synced(kThermalSensor, e.index))
        e.available.Insert(Modality::kThermal);
    }
    if (fs::path p = directory / "lidar" / (name + ".bin"); fs::exists(p)) {
      e.lidar = p;
      if (synced(kLidarSensor, e.index)) e.available.Insert(Modality::kLidar);
    }
    if (fs::path p = directory / "radar" / (name + ".bin"); fs::exists(p)) {
      e.radar = p;
      e.has_radar = synced(kRadarSensor, e.index);
    }
    if (fs::path p = directory / "labels" / (name + ".png"); fs::exists(p)) {
      e.labels = p;
      e.has_labels = true;
    }
    manifest.frames.push_back(std::move(e));
  }
  manifest.sequences.emplace(sequence, std::move(info));
  return manifest;
}

DatasetManifest LoadDataset(const fs::path& directory) {
  if (fs::exists(directory / "meta.csv")) return LoadSequence(directory);
  DatasetManifest merged;
  if (fs::is_directory(directory)) {
    std::vector<fs::path> children;
    for (const auto& entry : fs::directory_iterator(directory)) {
      if (entry.is_directory() && fs::exists(entry.path() / "meta.csv")) {
        children.push_back(entry.path());
      }
    }
    std::sort(children.begin(), children.end());
    for (const fs::path& child : children) {
      DatasetManifest m = LoadSequence(child);
      merged.sequences.merge(m.sequences);
      for (FrameEntry& f : m.frames) merged.frames.push_back(std::move(f));
    }
  }
  if (merged.sequences.empty()) {
    throw std::runtime_error(directory.string() +
                             ": no sequence metadata found");
  }
  return merged;
}

FrameBundle LoadFrame(const DatasetManifest& manifest, const FrameEntry& frame,
                      double lidar_normalizer) {
  const SequenceInfo& seq = manifest.sequences.at(frame.sequence);
  const CameraModel& cam = seq.calibration.reference.model;
  FrameBundle b;
  b.timestamp = frame.timestamp;
  b.tags = frame.tags;
  b.available = frame.available;

  b.rgb = LoadImage(frame.rgb);
  if (b.rgb.width() != cam.width || b.rgb.height() != cam.height ||
      b.rgb.channels() != 3) {
    throw FileError(frame.rgb, "image does not match the reference camera");
  }
  b.thermal = Image(cam.width, cam.height, 1);
  b.lidar = Image(cam.width, cam.height, 1);
  if (frame.available.Contains(Modality::kThermal)) {
    b.thermal = LoadImage(frame.thermal);
    if (b.thermal.width() != cam.width || b.thermal.height() != cam.height ||
        b.thermal.channels() != 1) {
      throw FileError(frame.thermal,
                      "thermal image is not aligned to the reference camera");
    }
  }
  if (frame.available.Contains(Modality::kLidar)) {
    b.cloud = ReadPointCloud(frame.lidar);
    b.lidar = LidarInputImage(
        ProjectPoints(b.cloud, seq.calibration.reference.lidar_to_camera, cam),
        cam, lidar_normalizer);
  }
  if (frame.has_labels) {
    b.labels = LoadLabels(frame.labels);
    if (b.labels.width() != cam.width || b.labels.height() != cam.height) {
      throw FileError(frame.labels, "labels do not match the reference camera");
    }
  } else {
    b.labels = LabelMap(cam.width, cam.height, label::kIgnore);
  }
  return b;
}

std::vector<FrameBundle> LoadFrames(const DatasetManifest& manifest,
                                    std::span<const std::string> frame_ids,
                                    double lidar_normalizer) {
  std::vector<FrameBundle> out;
  out.reserve(frame_ids.size());
  for (const std::string& id : frame_ids) {
    out.push_back(LoadFrame(manifest, manifest.Find(id), lidar_normalizer));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Splits.

SplitSpec MakeSplits(const DatasetManifest& manifest, SplitKind kind,
                     double val_ratio, uint64_t seed) {
  if (!(val_ratio >= 0.0 && val_ratio < 1.0)) {
    throw std::invalid_argument("val_ratio must be in [0, 1)");
  }
  SplitSpec spec;
  spec.kind = kind;
  std::vector<std::string> pool;
  for (const FrameEntry& f : manifest.frames) {
    bool test = false;
    switch (kind) {
      case SplitKind::kDayNight:
        test = f.tags.night;
        break;
      case SplitKind::kGeography:
        test = f.tags.location != "river";
        break;
      case SplitKind::kSaltwater:
        test = f.tags.location == "sea";
        break;
      case SplitKind::kDifficult:
        test = f.tags.difficult;
        break;
    }
    (test ? spec.test : pool).push_back(f.id);
  }
  if (spec.test.empty()) {
    static const std::map<SplitKind, const char*> kRequired = {
        {SplitKind::kDayNight, "night"},
        {SplitKind::kGeography, "non-river"},
        {SplitKind::kSaltwater, "sea"},
        {SplitKind::kDifficult, "difficult"}};
    throw std::invalid_argument(std::string("split requires ") +
                                kRequired.at(kind) + "-tagged frames");
  }
  if (kind == SplitKind::kGeography && pool.empty()) {
    throw std::invalid_argument("split requires river-tagged frames");
  }

  const size_t n_val = static_cast<size_t>(
      std::llround(static_cast<double>(pool.size()) * val_ratio));
  std::vector<size_t> order(pool.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(Rng::Mix(seed, static_cast<uint64_t>(kind)));
  rng.Shuffle(order);
  std::vector<bool> is_val(pool.size(), false);
  for (size_t i = 0; i < n_val; ++i) is_val[order[i]] = true;
  for (size_t i = 0; i < pool.size(); ++i) {
    (is_val[i] ? spec.val : spec.train).push_back(pool[i]);
  }
  return spec;
}

void WriteSplits(const fs::path& root, const SplitSpec& spec) {
  const fs::path dir = root / "splits" / SplitKindName(spec.kind);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw FileError(dir, ec.message());
  WriteIdList(dir / "train.txt", spec.train);
  WriteIdList(dir / "val.txt", spec.val);
  WriteIdList(dir / "test.txt", spec.test);
}

SplitSpec ReadSplits(const fs::path& root, SplitKind kind) {
  const fs::path dir = root / "splits" / SplitKindName(kind);
  SplitSpec spec;
  spec.kind = kind;
  spec.train = ReadIdList(dir / "train.txt");
  spec.val = ReadIdList(dir / "val.txt");
  spec.test = ReadIdList(dir / "test.txt");
  return spec;
}

}  // namespace seafuse
