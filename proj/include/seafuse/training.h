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

#ifndef SEAFUSE_TRAINING_H_
#define SEAFUSE_TRAINING_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "seafuse/dataio.h"
#include "seafuse/model.h"

namespace seafuse {

// Cross-entropy terms of one training iteration. The first pass sees every
// modality; the second sees the same data with RGB zeroed.
struct LossBreakdown {
  double ce_joint = 0.0;
  double ce_head_rgb = 0.0;
  double ce_head_aux = 0.0;
  double ce_masked_joint = 0.0;
  double ce_masked_aux = 0.0;
  double l_f = 0.0;
  double l_s = 0.0;
  double total = 0.0;

  bool operator==(const LossBreakdown&) const = default;
};

// The four training schemes: single or double pass, with or without the
// modality-specific heads.
enum class Variant { kBaseline, kH, kD, kDH };

const char* VariantName(Variant v);
Variant ParseVariant(std::string_view name);

enum class Optimizer { kAdam, kSgd };

struct TrainConfig {
  double learning_rate = 1e-5;
  int epochs = 100;
  int batch_size = 4;
  uint64_t seed = 0;
  bool double_pass = true;
  bool multihead = true;
  Optimizer optimizer = Optimizer::kAdam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void SetVariant(Variant v);
  void Validate() const;
};

struct OptimState {
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  int64_t step = 0;

  static OptimState For(const Params& params);
};

// Raised when a step produces a non-finite loss.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fills ce_joint (+ head terms when multihead) and l_f. Throws
// std::invalid_argument if multihead is requested but heads are absent.
LossBreakdown LossFirstPass(const PredictionSet& preds, const LabelMap& gt,
                            bool multihead);

// Fills ce_masked_joint (+ ce_masked_aux when multihead) and l_s. The RGB
// head output never contributes.
LossBreakdown LossSecondPass(const PredictionSet& masked_preds,
                             const LabelMap& gt, bool multihead);

// Combines both passes; without double_pass the second-pass fields are 0.
LossBreakdown TotalLoss(const LossBreakdown& first, const LossBreakdown& second,
                        bool double_pass);

struct LossAndGradients {
  LossBreakdown loss;
  Params gradients;
};

// Composed loss of one frame and its exact gradient.
LossAndGradients ComputeLossAndGradients(const Params& params,
                                         const FrameBundle& bundle,
                                         const LabelMap& gt,
                                         const TrainConfig& config);

// One optimizer update from the batch-mean gradient. Returns the batch-mean
// losses measured before the update.
LossBreakdown TrainStep(Params& params, OptimState& optim,
                        std::span<const FrameBundle* const> batch,
                        const TrainConfig& config);

struct EpochLogRow {
  int epoch = 0;
  LossBreakdown loss;
  std::optional<double> val_miou;

  bool operator==(const EpochLogRow&) const = default;
};

struct TrainResult {
  Params best;
  int best_epoch = 0;
  std::optional<double> best_val_miou;
  std::vector<EpochLogRow> log;
};

// Called after each epoch; useful for progress output.
using EpochCallback = std::function<void(const EpochLogRow&)>;

// Trains from InitParams(model_config, config.seed). The model's heads
// follow config.multihead. Keeps the parameters with the best validation
// mIoU; ties keep the earlier epoch.
TrainResult Train(const TrainConfig& config, ModelConfig model_config,
                  std::span<const FrameBundle> train,
                  std::span<const FrameBundle> val,
                  const EpochCallback& on_epoch = {});

inline constexpr const char* kEpochLogHeader =
    "epoch,ce_joint,ce_head_rgb,ce_head_aux,ce_masked_joint,ce_masked_aux,"
    "l_f,l_s,total,val_miou";

void WriteEpochLog(const std::filesystem::path& path,
                   std::span<const EpochLogRow> rows);
std::vector<EpochLogRow> ReadEpochLog(const std::filesystem::path& path);

struct GradCheckOptions {
  double eps = 1e-5;
  int samples = 100;
  uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  int samples = 0;
  // Draws rejected because a ReLU changed state within +-eps.
  int kink_skips = 0;
};

// Loss value plus the on/off state of every rectifier that produced it.
struct LossProbe {
  long double loss = 0.0L;
  std::vector<bool> activations;
};

// Central differences of `loss` at `samples` randomly chosen scalars of
// the selected tensors, compared with `analytic`. Relative error is
// |a - n| / max(|a|, |n|, 1e-12). The loss is carried in extended
// precision so the final reduction does not swamp small gradients. A draw
// whose +-eps probes change any rectifier state straddles a kink, where
// the central difference does not estimate the derivative; such draws are
// replaced and counted. Throws std::runtime_error if replacements exceed
// ten times `samples`. `params` is restored before returning.
GradCheckResult CheckGradients(
    Params& params, const Params& analytic,
    const std::function<LossProbe(const Params&)>& loss,
    const GradCheckOptions& options,
    const std::function<bool(const std::string&)>& select = {});

// The composed loss of `config`'s variant with the cross-entropy reductions
// carried out in extended precision. Forward passes stay in double.
LossProbe ComposedLossExtended(const Params& params, const FrameBundle& bundle,
                               const LabelMap& gt, const TrainConfig& config);

// Checks Backward on the full composed loss of `config`'s variant. Units
// sitting exactly at zero (a masked branch with zero biases) leave no
// kink-free neighbourhood; check at a generic point such as
// JitterBiases(InitParams(...)).
GradCheckResult GradCheck(const Params& params, const FrameBundle& bundle,
                          const LabelMap& gt, const TrainConfig& config,
                          const GradCheckOptions& options);

inline constexpr double kGradCheckTolerance = 1e-4;
inline constexpr double kGradCheckBiasJitter = 0.05;

// Copy of `params` with every bias drawn from N(0, scale^2).
Params JitterBiases(const Params& params, double scale, uint64_t seed);

}  // namespace seafuse

#endif  // SEAFUSE_TRAINING_H_
