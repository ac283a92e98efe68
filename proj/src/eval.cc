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

#include "seafuse/eval.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

namespace seafuse {
namespace fs = std::filesystem;

namespace {

const std::array<std::string, label::kNumClasses + 1>& MetricNames() {
  static const std::array<std::string, label::kNumClasses + 1> kNames = {
      "miou", "iou_sky", "iou_water", "iou_static_obstacle",
      "iou_dynamic_obstacle"};
  return kNames;
}

std::string FormatValue(const std::optional<double>& v) {
  if (!v) return "nan";
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << *v;
  return out.str();
}

std::string FormatPercent(const std::optional<double>& v) {
  if (!v) return "-";
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << *v * 100.0;
  return out.str();
}

void WriteText(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  out.flush();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

void EnsureDirectory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error(dir.string() + ": " + ec.message());
}

std::string MetricsRows(const std::string& name, const MetricsReport& m) {
  std::ostringstream out;
  out << name << ',' << MetricNames()[0] << ',' << FormatValue(m.miou) << '\n';
  for (int k = 0; k < label::kNumClasses; ++k) {
    out << name << ',' << MetricNames()[k + 1] << ',' << FormatValue(m.iou[k])
        << '\n';
  }
  for (int k = 0; k < label::kNumClasses; ++k) {
    out << name << ",pixels_" << label::ClassName(k) << ',' << m.gt_pixels[k]
        << '\n';
  }
  return out.str();
}

std::string SubsetLabel(ModalitySet s) {
  std::string text = s.ToString();
  for (char& c : text) {
    if (c == ',') c = '+';
  }
  return text;
}

}  // namespace

void ConfusionMatrix::Add(const LabelMap& pred, const LabelMap& gt) {
  if (pred.width() != gt.width() || pred.height() != gt.height()) {
    throw std::invalid_argument("prediction and ground truth sizes differ");
  }
  for (size_t i = 0; i < gt.size(); ++i) {
    const uint8_t g = gt.ids()[i];
    if (g == label::kIgnore) continue;
    const uint8_t p = pred.ids()[i];
    if (g >= kClasses || p >= kClasses) {
      throw std::invalid_argument("class id outside the scheme");
    }
    ++counts_[g][p];
  }
}

void ConfusionMatrix::Merge(const ConfusionMatrix& other) {
  for (int g = 0; g < kClasses; ++g) {
    for (int p = 0; p < kClasses; ++p) counts_[g][p] += other.counts_[g][p];
  }
}

int64_t ConfusionMatrix::Total() const {
  int64_t total = 0;
  for (const auto& row : counts_) {
    for (int64_t c : row) total += c;
  }
  return total;
}

ConfusionMatrix Confusion(const LabelMap& pred, const LabelMap& gt) {
  ConfusionMatrix cm;
  cm.Add(pred, gt);
  return cm;
}

MetricsReport Iou(const ConfusionMatrix& cm) {
  constexpr int kK = ConfusionMatrix::kClasses;
  MetricsReport report;
  double sum = 0.0;
  int defined = 0;
  for (int k = 0; k < kK; ++k) {
    int64_t row = 0, col = 0;
    for (int j = 0; j < kK; ++j) {
      row += cm.at(k, j);
      col += cm.at(j, k);
    }
    report.gt_pixels[k] = row;
    const int64_t denom = row + col - cm.at(k, k);
    if (denom == 0) continue;
    const double iou =
        static_cast<double>(cm.at(k, k)) / static_cast<double>(denom);
    report.iou[k] = iou;
    sum += iou;
    ++defined;
  }
  if (defined > 0) report.miou = sum / defined;
  return report;
}

ConfusionMatrix EvaluateConfusion(const Params& params,
                                  std::span<const FrameBundle> frames,
                                  ModalitySet mask) {
  ConfusionMatrix cm;
  for (const FrameBundle& f : frames)
    cm.Add(Predict(params, f, mask), f.labels);
  return cm;
}

MetricsReport Evaluate(const Params& params,
                       std::span<const FrameBundle> frames, ModalitySet mask) {
  return Iou(EvaluateConfusion(params, frames, mask));
}

AblationReport AblationSweep(const Params& params,
                             std::span<const FrameBundle> frames,
                             ModalitySet modalities) {
  AblationReport report;
  for (int bits = 1; bits < (1 << kNumModalities); ++bits) {
    const ModalitySet subset(static_cast<uint8_t>(bits));
    if ((subset.bits() & ~modalities.bits()) != 0) continue;
    report.rows.push_back(
        {subset, Evaluate(params, frames, subset.Complement())});
  }
  for (const AblationRow& small : report.rows) {
    for (const AblationRow& large : report.rows) {
      const bool superset =
          (small.inputs.bits() & large.inputs.bits()) == small.inputs.bits() &&
          small.inputs != large.inputs;
      if (superset && small.metrics.miou && large.metrics.miou &&
          *small.metrics.miou > *large.metrics.miou) {
        report.monotone = false;
      }
    }
  }
  return report;
}

void WriteMetricsCsv(const fs::path& path,
                     std::span<const NamedReport> reports) {
  std::string text = "name,metric,value\n";
  for (const NamedReport& r : reports) text += MetricsRows(r.name, r.metrics);
  WriteText(path, text);
}

std::vector<NamedReport> ReadMetricsCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || line != "name,metric,value") {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<NamedReport> reports;
  std::map<std::string, size_t> index;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const size_t a = line.find(',');
    const size_t b = line.find(',', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw std::runtime_error(path.string() + ": line " +
                               std::to_string(line_no) + " is malformed");
    }
    const std::string name = line.substr(0, a);
    const std::string metric = line.substr(a + 1, b - a - 1);
    const std::string value = line.substr(b + 1);
    auto [it, inserted] = index.try_emplace(name, reports.size());
    if (inserted) reports.push_back({name, {}});
    MetricsReport& m = reports[it->second].metrics;
    if (metric.starts_with("pixels_")) {
      int k = 0;
      while (k < label::kNumClasses &&
             metric.substr(7) != label::ClassName(k)) {
        ++k;
      }
      if (k == label::kNumClasses) {
        throw std::runtime_error(path.string() + ": unknown metric '" + metric +
                                 "'");
      }
      m.gt_pixels[k] = std::stoll(value);
      continue;
    }
    std::optional<double> parsed;
    if (value != "nan") {
      try {
        size_t used = 0;
        parsed = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        throw std::runtime_error(path.string() + ": line " +
                                 std::to_string(line_no) + ": bad value '" +
                                 value + "'");
      }
    }
    const auto& names = MetricNames();
    const auto pos = std::find(names.begin(), names.end(), metric);
    if (pos == names.end()) {
      throw std::runtime_error(path.string() + ": unknown metric '" + metric +
                               "'");
    }
    const long k = pos - names.begin();
    if (k == 0) {
      m.miou = parsed;
    } else {
      m.iou[k - 1] = parsed;
    }
  }
  return reports;
}

std::string MarkdownTable(std::span<const NamedReport> reports) {
  std::ostringstream out;
  out << "| model | mIoU";
  for (int k = 0; k < label::kNumClasses; ++k) {
    out << " | " << label::ClassName(k);
  }
  out << " |\n|---|---";
  for (int k = 0; k < label::kNumClasses; ++k) out << "|---";
  out << "|\n";
  for (const NamedReport& r : reports) {
    out << "| " << r.name << " | " << FormatPercent(r.metrics.miou);
    for (int k = 0; k < label::kNumClasses; ++k) {
      out << " | " << FormatPercent(r.metrics.iou[k]);
    }
    out << " |\n";
  }
  return out.str();
}

void EmitReport(std::span<const NamedReport> reports,
                const fs::path& directory) {
  EnsureDirectory(directory);
  WriteMetricsCsv(directory / "metrics.csv", reports);
  WriteText(directory / "report.md", MarkdownTable(reports));
}

void EmitAblation(const AblationReport& report, const fs::path& directory) {
  EnsureDirectory(directory);
  std::string csv = "subset,metric,value\n";
  std::vector<NamedReport> named;
  for (const AblationRow& row : report.rows) {
    csv += MetricsRows(SubsetLabel(row.inputs), row.metrics);
    named.push_back({SubsetLabel(row.inputs), row.metrics});
  }
  WriteText(directory / "ablation.csv", csv);
  std::string md = MarkdownTable(named);
  md += std::string("\nmonotone in input subsets: ") +
        (report.monotone ? "yes" : "no") + "\n";
  WriteText(directory / "ablation.md", md);
}

void WriteRadarCsv(const fs::path& path, const MetricsReport& val,
                   const MetricsReport& test) {
  std::string text = "axis,value\n";
  text += "val_miou," + FormatValue(val.miou) + "\n";
  text += "test_miou," + FormatValue(test.miou) + "\n";
  for (int k = 0; k < label::kNumClasses; ++k) {
    text += std::string("test_") + label::ClassName(k) + "," +
            FormatValue(test.iou[k]) + "\n";
  }
  WriteText(path, text);
}

}  // namespace seafuse
