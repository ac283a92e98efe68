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

#ifndef SEAFUSE_MODEL_H_
#define SEAFUSE_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "seafuse/dataio.h"
#include "seafuse/image.h"
#include "seafuse/modality.h"

namespace seafuse {

// Dense row-major tensor of doubles.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> values;

  Tensor() = default;
  explicit Tensor(std::vector<int> dims, double fill = 0.0);

  size_t size() const { return values.size(); }
  int dim(size_t i) const { return shape[i]; }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }

  bool operator==(const Tensor&) const = default;
};

// Two-branch encoder geometry. Stage s halves the resolution and produces
// channels[s] feature maps per branch.
struct ModelConfig {
  std::vector<int> channels = {8, 16, 32};
  int classes = label::kNumClasses;
  int height = 64;
  int width = 64;
  // Adds the RGB-only and auxiliary-only decoder heads.
  bool multihead = true;

  int stages() const { return static_cast<int>(channels.size()); }

  // Throws std::invalid_argument for empty stages, non-positive channel
  // counts or image sizes not divisible by 2^stages.
  void Validate() const;

  bool operator==(const ModelConfig&) const = default;
};

// Named parameter tensors in a fixed order:
//   rgb_encoder.<s>.{weight,bias}   [C_s, C_{s-1}, 3, 3], [C_s]
//   aux_encoder.<s>.{weight,bias}   [C_s, C_{s-1}, 3, 3], [C_s]
//   fusion.<s>.{weight,bias}        [C_s, 2 C_s], [C_s]
//   head_<name>.<s>.weight          [K, C_s]
//   head_<name>.bias                [K]
// with head names joint, and (multihead) rgb, aux.
class Params {
 public:
  Params() = default;
  // Zero-filled tensors laid out for `config`.
  explicit Params(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }

  size_t count() const { return tensors_.size(); }
  const std::string& name(size_t i) const { return tensors_[i].first; }
  Tensor& tensor(size_t i) { return tensors_[i].second; }
  const Tensor& tensor(size_t i) const { return tensors_[i].second; }

  // Throws std::out_of_range for unknown names.
  Tensor& Get(const std::string& name);
  const Tensor& Get(const std::string& name) const;
  bool Has(const std::string& name) const;

  size_t ScalarCount() const;
  bool AllFinite() const;

  // Incremented on every in-place update; forward caches record it.
  uint64_t revision() const { return revision_; }
  void Touch() { ++revision_; }

  // Values and layout only; revisions are ignored.
  bool operator==(const Params& other) const;

 private:
  ModelConfig config_;
  std::vector<std::pair<std::string, Tensor>> tensors_;
  uint64_t revision_ = 0;
};

// Fan-in scaled normal weights (Kaiming for rectified layers), zero biases.
Params InitParams(const ModelConfig& config, uint64_t seed);

// Logit maps, each [K, H, W]. The modality heads are absent when the model
// was built without them.
struct PredictionSet {
  Tensor z_joint;
  std::optional<Tensor> z_rgb;
  std::optional<Tensor> z_aux;
};

// Upstream gradients matching a PredictionSet; absent maps count as zero.
struct PredictionGrads {
  Tensor z_joint;
  std::optional<Tensor> z_rgb;
  std::optional<Tensor> z_aux;
};

struct ForwardCache {
  const Params* params = nullptr;
  uint64_t revision = 0;
  Tensor rgb_input;                  // [3, H, W]
  Tensor aux_input;                  // [2, H, W] thermal, lidar
  std::vector<Tensor> rgb_features;  // post-activation, per stage
  std::vector<Tensor> aux_features;
  std::vector<Tensor> gates;
  std::vector<Tensor> fused;
};

struct ForwardResult {
  PredictionSet predictions;
  ForwardCache cache;
};

// Copy of the bundle with one modality replaced by zeros.
FrameBundle MaskModality(const FrameBundle& bundle, Modality modality);

// Throws std::invalid_argument when the bundle does not match the config.
ForwardResult Forward(const Params& params, const FrameBundle& bundle,
                      ModalitySet mask = ModalitySet::None());

// Gradients of a scalar loss given its gradients w.r.t. the logits.
// Throws std::logic_error if the cache belongs to another parameter state.
Params Backward(const Params& params, const ForwardCache& cache,
                const PredictionGrads& upstream);

// Mean over non-ignore pixels of -log softmax(logits)[label]; 0 when every
// pixel is ignored.
double SoftmaxCrossEntropy(const Tensor& logits, const LabelMap& labels);

// Loss and d(scale * loss)/d(logits).
std::pair<double, Tensor> SoftmaxCrossEntropyWithGrad(const Tensor& logits,
                                                      const LabelMap& labels,
                                                      double scale = 1.0);

// Per-pixel argmax; ties go to the smallest class id.
LabelMap ArgmaxLabels(const Tensor& logits);

// Argmax of the joint head; the modality heads are not evaluated.
LabelMap Predict(const Params& params, const FrameBundle& bundle,
                 ModalitySet mask = ModalitySet::None());

// Binary checkpoint container; see docs/checkpoint_format.md.
void SaveCheckpoint(const std::filesystem::path& path, const Params& params);
Params LoadCheckpoint(const std::filesystem::path& path);

}  // namespace seafuse

#endif  // SEAFUSE_MODEL_H_
