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

#ifndef SEAFUSE_EVAL_H_
#define SEAFUSE_EVAL_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "seafuse/image.h"
#include "seafuse/modality.h"
#include "seafuse/model.h"

namespace seafuse {

// counts[gt][pred] over non-ignore ground-truth pixels.
class ConfusionMatrix {
 public:
  static constexpr int kClasses = label::kNumClasses;

  // Throws std::invalid_argument on size mismatch or out-of-scheme ids.
  void Add(const LabelMap& pred, const LabelMap& gt);
  void Merge(const ConfusionMatrix& other);

  int64_t at(int gt, int pred) const { return counts_[gt][pred]; }
  int64_t& at(int gt, int pred) { return counts_[gt][pred]; }
  int64_t Total() const;

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::array<std::array<int64_t, kClasses>, kClasses> counts_{};
};

ConfusionMatrix Confusion(const LabelMap& pred, const LabelMap& gt);

struct MetricsReport {
  // nullopt where the class is absent from both prediction and ground truth.
  std::array<std::optional<double>, label::kNumClasses> iou{};
  // Mean over defined classes; nullopt when none are defined.
  std::optional<double> miou;
  std::array<int64_t, label::kNumClasses> gt_pixels{};

  bool operator==(const MetricsReport&) const = default;
};

MetricsReport Iou(const ConfusionMatrix& cm);

// Accumulated metrics of Predict(params, frame, mask) over the frames.
ConfusionMatrix EvaluateConfusion(const Params& params,
                                  std::span<const FrameBundle> frames,
                                  ModalitySet mask = ModalitySet::None());
MetricsReport Evaluate(const Params& params,
                       std::span<const FrameBundle> frames,
                       ModalitySet mask = ModalitySet::None());

struct AblationRow {
  // Modalities given to the model; the rest are zeroed.
  ModalitySet inputs;
  MetricsReport metrics;
};

struct AblationReport {
  // Ordered by input bitmask, ascending.
  std::vector<AblationRow> rows;
  // True when no row scores a higher mIoU than a row using a strict
  // superset of its inputs. Diagnostic only.
  bool monotone = true;
};

// Evaluates every non-empty subset of `modalities`. Modalities outside the
// list are always zeroed.
AblationReport AblationSweep(const Params& params,
                             std::span<const FrameBundle> frames,
                             ModalitySet modalities = ModalitySet::All());

struct NamedReport {
  std::string name;
  MetricsReport metrics;

  bool operator==(const NamedReport&) const = default;
};

// CSV `name,metric,value` with metrics miou and iou_<class>; undefined
// values are written as `nan`. Full precision.
void WriteMetricsCsv(const std::filesystem::path& path,
                     std::span<const NamedReport> reports);
std::vector<NamedReport> ReadMetricsCsv(const std::filesystem::path& path);

// Markdown table, one row per report: mIoU and per-class IoU in percent
// with two decimals.
std::string MarkdownTable(std::span<const NamedReport> reports);

// Writes metrics.csv and report.md into `directory`.
void EmitReport(std::span<const NamedReport> reports,
                const std::filesystem::path& directory);

// Writes ablation.csv (`subset,metric,value`) and ablation.md.
void EmitAblation(const AblationReport& report,
                  const std::filesystem::path& directory);

// `axis,value` rows: val mIoU, test mIoU, then test IoU per class.
void WriteRadarCsv(const std::filesystem::path& path, const MetricsReport& val,
                   const MetricsReport& test);

}  // namespace seafuse

#endif  // SEAFUSE_EVAL_H_
