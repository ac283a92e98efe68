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

#include "seafuse/training.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "test_util.h"

namespace seafuse {
namespace {

using testing_util::RandomBundle;

const double kLn4 = std::log(4.0);

ModelConfig SmallConfig() {
  ModelConfig c;
  c.channels = {3, 4};
  c.height = c.width = 8;
  return c;
}

Tensor RandomLogits(Rng& rng, int h, int w) {
  Tensor z({label::kNumClasses, h, w});
  for (double& v : z.values) v = rng.Uniform(-4, 4);
  return z;
}

PredictionSet UniformPredictions(int h, int w) {
  const Tensor zero({label::kNumClasses, h, w}, 0.0);
  return {zero, zero, zero};
}

TEST(VariantTest, NamesAndFlags) {
  for (Variant v :
       {Variant::kBaseline, Variant::kH, Variant::kD, Variant::kDH}) {
    EXPECT_EQ(ParseVariant(VariantName(v)), v);
  }
  EXPECT_THROW(ParseVariant("triple"), std::invalid_argument);
  TrainConfig c;
  c.SetVariant(Variant::kBaseline);
  EXPECT_FALSE(c.double_pass || c.multihead);
  c.SetVariant(Variant::kH);
  EXPECT_TRUE(c.multihead && !c.double_pass);
  c.SetVariant(Variant::kD);
  EXPECT_TRUE(c.double_pass && !c.multihead);
  c.SetVariant(Variant::kDH);
  EXPECT_TRUE(c.double_pass && c.multihead);
}

TEST(TrainConfigTest, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.Validate());
  c.learning_rate = 0.0;
  EXPECT_NO_THROW(c.Validate());
  c.learning_rate = -1.0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = TrainConfig();
  c.batch_size = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
  c = TrainConfig();
  c.epochs = 0;
  EXPECT_THROW(c.Validate(), std::invalid_argument);
}

TEST(LossTest, UniformExamples) {
  const PredictionSet p = UniformPredictions(3, 3);
  const LabelMap gt(3, 3, 1);
  const LossBreakdown first = LossFirstPass(p, gt, true);
  EXPECT_NEAR(first.l_f, 3 * kLn4, 1e-12);
  EXPECT_NEAR(first.l_f, 4.158883, 1e-6);
  EXPECT_NEAR(LossFirstPass(p, gt, false).l_f, kLn4, 1e-12);
  const LossBreakdown second = LossSecondPass(p, gt, true);
  EXPECT_NEAR(second.l_s, 2 * kLn4, 1e-12);
  EXPECT_NEAR(second.l_s, 2.772589, 1e-6);
  EXPECT_NEAR(LossSecondPass(p, gt, false).l_s, kLn4, 1e-12);
  const LossBreakdown total = TotalLoss(first, second, true);
  EXPECT_NEAR(total.total, 5 * kLn4, 1e-12);
  EXPECT_NEAR(total.total, 6.931472, 1e-6);
  const LossBreakdown single = TotalLoss(first, second, false);
  EXPECT_EQ(single.total, first.l_f);
  EXPECT_EQ(single.l_s, 0.0);
  EXPECT_EQ(single.ce_masked_joint, 0.0);
}

TEST(LossTest, MissingHeadsFail) {
  PredictionSet p = UniformPredictions(2, 2);
  p.z_aux.reset();
  EXPECT_THROW(LossFirstPass(p, LabelMap(2, 2, 0), true),
               std::invalid_argument);
  EXPECT_THROW(LossSecondPass(p, LabelMap(2, 2, 0), true),
               std::invalid_argument);
  EXPECT_NO_THROW(LossFirstPass(p, LabelMap(2, 2, 0), false));
}

TEST(LossTest, TermsMatchIndependentCrossEntropy) {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const PredictionSet a{RandomLogits(rng, 4, 4), RandomLogits(rng, 4, 4),
                          RandomLogits(rng, 4, 4)};
    const PredictionSet b{RandomLogits(rng, 4, 4), RandomLogits(rng, 4, 4),
                          RandomLogits(rng, 4, 4)};
    const LabelMap gt = testing_util::RandomLabels(rng, 4, 4, true);
    const LossBreakdown f = LossFirstPass(a, gt, true);
    const LossBreakdown s = LossSecondPass(b, gt, true);
    const LossBreakdown t = TotalLoss(f, s, true);
    ASSERT_NEAR(f.l_f,
                SoftmaxCrossEntropy(a.z_joint, gt) +
                    SoftmaxCrossEntropy(*a.z_rgb, gt) +
                    SoftmaxCrossEntropy(*a.z_aux, gt),
                1e-12);
    ASSERT_NEAR(
        s.l_s,
        SoftmaxCrossEntropy(b.z_joint, gt) + SoftmaxCrossEntropy(*b.z_aux, gt),
        1e-12);
    ASSERT_NEAR(t.total - (t.l_f + t.l_s), 0.0, 1e-12);
  }
}

TEST(LossTest, SecondPassIgnoresRgbHead) {
  Rng rng(32);
  PredictionSet p{RandomLogits(rng, 3, 5), RandomLogits(rng, 3, 5),
                  RandomLogits(rng, 3, 5)};
  const LabelMap gt = testing_util::RandomLabels(rng, 5, 3, false);
  const LossBreakdown before = LossSecondPass(p, gt, true);
  p.z_rgb = RandomLogits(rng, 3, 5);
  EXPECT_EQ(LossSecondPass(p, gt, true), before);
  p.z_rgb.reset();
  EXPECT_EQ(LossSecondPass(p, gt, true), before);
}

TEST(ComputeLossTest, VariantFieldsAreZeroWhereExpected) {
  Rng rng(33);
  const FrameBundle b = RandomBundle(rng, 8, 8);
  for (Variant v :
       {Variant::kBaseline, Variant::kH, Variant::kD, Variant::kDH}) {
    TrainConfig c;
    c.SetVariant(v);
    ModelConfig mc = SmallConfig();
    mc.multihead = c.multihead;
    const LossBreakdown l =
        ComputeLossAndGradients(InitParams(mc, 1), b, b.labels, c).loss;
    EXPECT_GT(l.ce_joint, 0.0);
    EXPECT_EQ(l.ce_head_rgb > 0.0, c.multihead) << VariantName(v);
    EXPECT_EQ(l.ce_head_aux > 0.0, c.multihead) << VariantName(v);
    EXPECT_EQ(l.ce_masked_joint > 0.0, c.double_pass) << VariantName(v);
    EXPECT_EQ(l.ce_masked_aux > 0.0, c.double_pass && c.multihead);
    EXPECT_EQ(l.l_s > 0.0, c.double_pass);
    EXPECT_NEAR(l.total, l.l_f + l.l_s, 1e-12);
  }
}

TEST(TrainStepTest, ZeroLearningRateKeepsParams) {
  Rng rng(34);
  const FrameBundle b = RandomBundle(rng, 8, 8);
  const FrameBundle* batch[] = {&b};
  for (Optimizer o : {Optimizer::kAdam, Optimizer::kSgd}) {
    TrainConfig c;
    c.learning_rate = 0.0;
    c.optimizer = o;
    Params p = InitParams(SmallConfig(), 2);
    const Params before = p;
    OptimState state = OptimState::For(p);
    const LossBreakdown l = TrainStep(p, state, batch, c);
    EXPECT_EQ(p, before);
    EXPECT_GT(l.total, 0.0);
    EXPECT_EQ(state.step, 1);
  }
}

TEST(TrainStepTest, BaselineReportsNoSecondPass) {
  Rng rng(35);
  const FrameBundle b = RandomBundle(rng, 8, 8);
  const FrameBundle* batch[] = {&b};
  TrainConfig c;
  c.SetVariant(Variant::kBaseline);
  ModelConfig mc = SmallConfig();
  mc.multihead = false;
  Params p = InitParams(mc, 2);
  OptimState state = OptimState::For(p);
  const LossBreakdown l = TrainStep(p, state, batch, c);
  EXPECT_EQ(l.l_s, 0.0);
  EXPECT_EQ(l.total, l.l_f);
}

TEST(TrainStepTest, SmallStepDescends) {
  int decreased = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    const FrameBundle b = RandomBundle(rng, 8, 8);
    const FrameBundle* batch[] = {&b};
    TrainConfig c;
    c.optimizer = Optimizer::kSgd;
    c.learning_rate = 1e-3;
    Params p = JitterBiases(InitParams(SmallConfig(), seed), 0.05, seed);
    OptimState state = OptimState::For(p);
    const double before = TrainStep(p, state, batch, c).total;
    const double after = ComputeLossAndGradients(p, b, b.labels, c).loss.total;
    if (after < before) ++decreased;
  }
  EXPECT_GE(decreased, 18);
}

TEST(TrainStepTest, NonFiniteLossAborts) {
  Rng rng(36);
  const FrameBundle b = RandomBundle(rng, 8, 8);
  const FrameBundle* batch[] = {&b};
  Params p = InitParams(SmallConfig(), 2);
  // Rectifiers map NaN to zero, so poison the joint head's final layer.
  size_t head = 0;
  for (size_t t = 0; t < p.count(); ++t) {
    if (p.name(t).starts_with("head_joint") && p.name(t).ends_with("weight")) {
      head = t;
    }
  }
  for (double& v : p.tensor(head).values) v = NAN;
  p.Touch();
  OptimState state = OptimState::For(p);
  try {
    TrainStep(p, state, batch, TrainConfig());
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite loss"), std::string::npos);
  }
}

std::vector<FrameBundle> ToyFrames(int n, uint64_t seed) {
  SyntheticSceneParams p;
  p.width = p.height = 32;
  p.seed = seed;
  return SynthesizeSequence(p, n, 0);
}

TEST(TrainTest, OneEpochOneRowAndDeterministic) {
  const std::vector<FrameBundle> train = ToyFrames(6, 1);
  const std::vector<FrameBundle> val = ToyFrames(2, 2);
  TrainConfig c;
  c.epochs = 1;
  c.learning_rate = 1e-3;
  ModelConfig mc;
  mc.width = mc.height = 32;
  const TrainResult a = Train(c, mc, train, val);
  ASSERT_EQ(a.log.size(), 1u);
  EXPECT_EQ(a.log[0].epoch, 1);
  EXPECT_TRUE(a.log[0].val_miou.has_value());
  EXPECT_EQ(a.best_epoch, 1);
  c.epochs = 3;
  const TrainResult b = Train(c, mc, train, val);
  const TrainResult b2 = Train(c, mc, train, val);
  ASSERT_EQ(b.log.size(), 3u);
  EXPECT_EQ(b.log, b2.log);
  EXPECT_EQ(b.best, b2.best);
  EXPECT_EQ(b.log[0], a.log[0]);
}

TEST(TrainTest, EmptySetsFail) {
  TrainConfig c;
  c.epochs = 1;
  ModelConfig mc;
  mc.width = mc.height = 32;
  const std::vector<FrameBundle> frames = ToyFrames(2, 4);
  EXPECT_THROW(Train(c, mc, frames, {}), std::invalid_argument);
  EXPECT_THROW(Train(c, mc, {}, frames), std::invalid_argument);
}

TEST(EpochLogTest, RoundTrip) {
  testing_util::TempDir dir("log");
  Rng rng(37);
  std::vector<EpochLogRow> rows;
  for (int e = 1; e <= 4; ++e) {
    EpochLogRow r;
    r.epoch = e;
    r.loss = {rng.Uniform(), rng.Uniform(), 0.0,           rng.Uniform(),
              1.0 / 3.0,     rng.Uniform(), rng.Uniform(), rng.Uniform()};
    if (e != 2) r.val_miou = rng.Uniform();
    rows.push_back(r);
  }
  WriteEpochLog(dir.path() / "log.csv", rows);
  EXPECT_EQ(ReadEpochLog(dir.path() / "log.csv"), rows);
  WriteEpochLog(dir.path() / "empty.csv", {});
  EXPECT_TRUE(ReadEpochLog(dir.path() / "empty.csv").empty());
}

TEST(CheckGradientsTest, LinearLossIsExact) {
  Params p = InitParams(SmallConfig(), 3);
  Params coefficients = p;
  Rng rng(38);
  for (size_t t = 0; t < coefficients.count(); ++t) {
    for (double& v : coefficients.tensor(t).values) v = rng.Uniform(-1, 1);
  }
  auto linear = [&](const Params& q) {
    LossProbe probe;
    for (size_t t = 0; t < q.count(); ++t) {
      for (size_t i = 0; i < q.tensor(t).size(); ++i) {
        probe.loss +=
            static_cast<long double>(coefficients.tensor(t).values[i]) *
            q.tensor(t).values[i];
      }
    }
    return probe;
  };
  const Params before = p;
  const GradCheckResult r =
      CheckGradients(p, coefficients, linear, {1e-5, 100, 1});
  EXPECT_LT(r.max_rel_error, 1e-9);
  EXPECT_EQ(r.samples, 100);
  EXPECT_EQ(r.kink_skips, 0);
  EXPECT_EQ(p, before);
}

class ToyModelGradCheck : public ::testing::Test {
 protected:
  void SetUp() override {
    SyntheticSceneParams sp;
    bundle_ = SynthesizeFrame(sp, 0);
    params_ = JitterBiases(InitParams(ModelConfig(), 0), 0.05, Rng::Mix(0, 1));
  }
  FrameBundle bundle_;
  Params params_;
};

TEST_F(ToyModelGradCheck, FullCompositeLossPasses) {
  TrainConfig c;
  c.SetVariant(Variant::kDH);
  const GradCheckResult r =
      GradCheck(params_, bundle_, bundle_.labels, c, GradCheckOptions());
  EXPECT_LT(r.max_rel_error, 1e-4) << r.worst_parameter;
  EXPECT_EQ(r.samples, 100);
}

TEST_F(ToyModelGradCheck, CorruptedGradientIsCaught) {
  TrainConfig c;
  const std::string target = "fusion.2.weight";
  Params analytic =
      ComputeLossAndGradients(params_, bundle_, bundle_.labels, c).gradients;
  for (double& v : analytic.Get(target).values) v *= 2.0;
  Params probe = params_;
  const GradCheckResult r = CheckGradients(
      probe, analytic,
      [&](const Params& q) {
        return ComposedLossExtended(q, bundle_, bundle_.labels, c);
      },
      {1e-5, 20, 2}, [&](const std::string& name) { return name == target; });
  EXPECT_GT(r.max_rel_error, 0.3);
  EXPECT_EQ(r.worst_parameter.rfind(target, 0), 0u) << r.worst_parameter;
}

TEST(JitterBiasesTest, OnlyBiasesChange) {
  const Params p = InitParams(SmallConfig(), 4);
  const Params j = JitterBiases(p, 0.1, 9);
  EXPECT_EQ(j, JitterBiases(p, 0.1, 9));
  for (size_t t = 0; t < p.count(); ++t) {
    if (p.name(t).ends_with("bias")) {
      EXPECT_NE(j.tensor(t), p.tensor(t)) << p.name(t);
    } else {
      EXPECT_EQ(j.tensor(t), p.tensor(t)) << p.name(t);
    }
  }
}

}  // namespace
}  // namespace seafuse
