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

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "test_util.h"

namespace seafuse {
namespace {

using testing_util::RandomLabels;

LabelMap Row(std::initializer_list<uint8_t> ids) {
  LabelMap m(static_cast<int>(ids.size()), 1, 0);
  std::copy(ids.begin(), ids.end(), m.ids().begin());
  return m;
}

// IoU by explicit pixel sets, skipping ignored ground truth.
MetricsReport IouBySets(const LabelMap& pred, const LabelMap& gt) {
  MetricsReport r;
  double sum = 0.0;
  int defined = 0;
  for (int k = 0; k < label::kNumClasses; ++k) {
    std::set<size_t> p, g;
    for (size_t i = 0; i < gt.ids().size(); ++i) {
      if (gt.ids()[i] == label::kIgnore) continue;
      if (pred.ids()[i] == k) p.insert(i);
      if (gt.ids()[i] == k) g.insert(i);
    }
    r.gt_pixels[k] = static_cast<int64_t>(g.size());
    std::set<size_t> both;
    for (size_t i : p) {
      if (g.contains(i)) both.insert(i);
    }
    const size_t uni = p.size() + g.size() - both.size();
    if (uni == 0) continue;
    r.iou[k] = static_cast<double>(both.size()) / static_cast<double>(uni);
    sum += *r.iou[k];
    ++defined;
  }
  if (defined > 0) r.miou = sum / defined;
  return r;
}

TEST(ConfusionTest, Examples) {
  Rng rng(1);
  const LabelMap gt = RandomLabels(rng, 8, 8, false);
  const ConfusionMatrix cm = Confusion(gt, gt);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      if (a != b) EXPECT_EQ(cm.at(a, b), 0);
    }
  }
  EXPECT_EQ(cm.Total(), 64);
  EXPECT_EQ(Confusion(gt, LabelMap(8, 8, label::kIgnore)), ConfusionMatrix());
  EXPECT_THROW(Confusion(gt, LabelMap(4, 4, 0)), std::invalid_argument);
}

TEST(ConfusionTest, MatchesPixelCounting) {
  Rng rng(2);
  for (int trial = 0; trial < 200; ++trial) {
    const LabelMap pred = RandomLabels(rng, 8, 8, false);
    const LabelMap gt = RandomLabels(rng, 8, 8, true);
    const ConfusionMatrix cm = Confusion(pred, gt);
    for (int g = 0; g < 4; ++g) {
      for (int p = 0; p < 4; ++p) {
        int64_t n = 0;
        for (size_t i = 0; i < 64; ++i) {
          n += gt.ids()[i] == g && pred.ids()[i] == p;
        }
        ASSERT_EQ(cm.at(g, p), n);
      }
    }
  }
}

TEST(ConfusionTest, MergeAddsCounts) {
  Rng rng(3);
  const LabelMap a = RandomLabels(rng, 8, 8, false);
  const LabelMap b = RandomLabels(rng, 8, 8, false);
  ConfusionMatrix m = Confusion(a, b);
  m.Merge(Confusion(b, a));
  ConfusionMatrix n;
  n.Add(a, b);
  n.Add(b, a);
  EXPECT_EQ(m, n);
  EXPECT_EQ(m.Total(), 128);
  EXPECT_THROW(Confusion(RandomLabels(rng, 8, 8, true), a),
               std::invalid_argument);
}

TEST(IouTest, Examples) {
  Rng rng(4);
  LabelMap gt = RandomLabels(rng, 8, 8, false);
  for (int k = 0; k < 4; ++k) gt.ids()[k] = static_cast<uint8_t>(k);
  const MetricsReport perfect = Iou(Confusion(gt, gt));
  for (const auto& v : perfect.iou) EXPECT_EQ(v, 1.0);
  EXPECT_EQ(perfect.miou, 1.0);

  using namespace label;
  const MetricsReport r = Iou(Confusion(Row({kWater, kSky, kSky, kSky}),
                                        Row({kWater, kWater, kSky, kSky})));
  EXPECT_EQ(r.iou[kWater], 0.5);
  EXPECT_DOUBLE_EQ(*r.iou[kSky], 2.0 / 3.0);
  EXPECT_FALSE(r.iou[kStaticObstacle].has_value());
  EXPECT_FALSE(r.iou[kDynamicObstacle].has_value());
  EXPECT_NEAR(*r.miou, 0.5833, 1e-4);

  EXPECT_FALSE(Iou(ConfusionMatrix()).miou.has_value());
}

TEST(IouTest, MatchesPixelSets) {
  Rng rng(5);
  for (int trial = 0; trial < 500; ++trial) {
    const LabelMap pred = RandomLabels(rng, 8, 8, false);
    const LabelMap gt = RandomLabels(rng, 8, 8, trial % 2 == 0);
    ASSERT_EQ(Iou(Confusion(pred, gt)), IouBySets(pred, gt));
  }
}

class SmallModelEval : public ::testing::Test {
 protected:
  void SetUp() override {
    ModelConfig c;
    c.channels = {3, 4};
    c.width = c.height = 8;
    params_ = InitParams(c, 6);
    Rng rng(7);
    for (int i = 0; i < 3; ++i) {
      frames_.push_back(testing_util::RandomBundle(rng, 8, 8));
    }
  }
  Params params_;
  std::vector<FrameBundle> frames_;
};

TEST_F(SmallModelEval, EvaluateAccumulatesFrames) {
  ConfusionMatrix expected;
  for (const FrameBundle& f : frames_)
    expected.Add(Predict(params_, f), f.labels);
  EXPECT_EQ(EvaluateConfusion(params_, frames_), expected);
  EXPECT_EQ(Evaluate(params_, frames_), Iou(expected));
  EXPECT_FALSE(Evaluate(params_, {}).miou.has_value());
}

TEST_F(SmallModelEval, AblationHasSevenRows) {
  const AblationReport r = AblationSweep(params_, frames_);
  ASSERT_EQ(r.rows.size(), 7u);
  std::set<uint8_t> seen;
  for (const AblationRow& row : r.rows) {
    EXPECT_FALSE(row.inputs.empty());
    seen.insert(row.inputs.bits());
    EXPECT_EQ(row.metrics, Evaluate(params_, frames_, row.inputs.Complement()));
    if (row.inputs == ModalitySet::All()) {
      EXPECT_EQ(row.metrics, Evaluate(params_, frames_));
    }
  }
  EXPECT_EQ(seen.size(), 7u);
  EXPECT_EQ(
      AblationSweep(params_, frames_, {Modality::kThermal, Modality::kLidar})
          .rows.size(),
      3u);
}

std::vector<NamedReport> RandomReports(Rng& rng, int n) {
  std::vector<NamedReport> out;
  for (int i = 0; i < n; ++i) {
    NamedReport r{"model_" + std::to_string(i), {}};
    for (int k = 0; k < label::kNumClasses; ++k) {
      if (rng.Uniform() < 0.8) r.metrics.iou[k] = rng.Uniform();
      r.metrics.gt_pixels[k] = rng.IntInRange(0, 100000);
    }
    if (i != 1) r.metrics.miou = rng.Uniform();
    out.push_back(r);
  }
  return out;
}

TEST(ReportTest, EmptyCsvIsHeaderOnly) {
  testing_util::TempDir dir("csv0");
  WriteMetricsCsv(dir.path() / "m.csv", {});
  std::ifstream in(dir.path() / "m.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1);
  EXPECT_TRUE(ReadMetricsCsv(dir.path() / "m.csv").empty());
}

TEST(ReportTest, CsvRoundTrip) {
  testing_util::TempDir dir("csv");
  Rng rng(8);
  const std::vector<NamedReport> reports = RandomReports(rng, 4);
  WriteMetricsCsv(dir.path() / "m.csv", reports);
  EXPECT_EQ(ReadMetricsCsv(dir.path() / "m.csv"), reports);
  std::ofstream(dir.path() / "bad.csv") << "name,metric,value\nx,miou,abc\n";
  EXPECT_THROW(ReadMetricsCsv(dir.path() / "bad.csv"), std::runtime_error);
}

TEST(ReportTest, MarkdownRowPerReport) {
  Rng rng(9);
  for (int n : {0, 1, 7}) {
    const std::string md = MarkdownTable(RandomReports(rng, n));
    int rows = 0;
    for (char c : md) rows += c == '\n';
    EXPECT_EQ(rows, n + 2);
  }
}

TEST(ReportTest, EmitWritesFiles) {
  testing_util::TempDir dir("emit");
  Rng rng(10);
  const std::vector<NamedReport> reports = RandomReports(rng, 2);
  EmitReport(reports, dir.path() / "r");
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "r" / "report.md"));
  EXPECT_EQ(ReadMetricsCsv(dir.path() / "r" / "metrics.csv"), reports);
}

}  // namespace
}  // namespace seafuse
