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

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <tuple>

#include "seafuse/eval.h"
#include "seafuse/random.h"

namespace seafuse {
namespace {

constexpr uint64_t kShuffleStream = 0x73687566666c65ull;

const Tensor& RequireHead(const std::optional<Tensor>& head, const char* name) {
  if (!head) {
    throw std::invalid_argument(std::string("multihead loss needs the ") +
                                name + " head, which the model lacks");
  }
  return *head;
}

void AddScaled(Params& into, const Params& from, double scale) {
  for (size_t i = 0; i < into.count(); ++i) {
    std::vector<double>& dst = into.tensor(i).values;
    const std::vector<double>& src = from.tensor(i).values;
    for (size_t j = 0; j < dst.size(); ++j) dst[j] += scale * src[j];
  }
}

void AddScaled(LossBreakdown& into, const LossBreakdown& from, double scale) {
  into.ce_joint += scale * from.ce_joint;
  into.ce_head_rgb += scale * from.ce_head_rgb;
  into.ce_head_aux += scale * from.ce_head_aux;
  into.ce_masked_joint += scale * from.ce_masked_joint;
  into.ce_masked_aux += scale * from.ce_masked_aux;
  into.l_f += scale * from.l_f;
  into.l_s += scale * from.l_s;
  into.total += scale * from.total;
}

std::string Describe(const LossBreakdown& l) {
  std::ostringstream out;
  out << "ce_joint=" << l.ce_joint << " ce_head_rgb=" << l.ce_head_rgb
      << " ce_head_aux=" << l.ce_head_aux
      << " ce_masked_joint=" << l.ce_masked_joint
      << " ce_masked_aux=" << l.ce_masked_aux << " l_f=" << l.l_f
      << " l_s=" << l.l_s << " total=" << l.total;
  return out.str();
}

void ApplyUpdate(Params& params, OptimState& optim, const Params& grads,
                 const TrainConfig& config) {
  ++optim.step;
  const double lr = config.learning_rate;
  if (config.optimizer == Optimizer::kSgd) {
    for (size_t i = 0; i < params.count(); ++i) {
      std::vector<double>& p = params.tensor(i).values;
      const std::vector<double>& g = grads.tensor(i).values;
      for (size_t j = 0; j < p.size(); ++j) p[j] -= lr * g[j];
    }
  } else {
    const double b1 = config.beta1, b2 = config.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(optim.step));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(optim.step));
    for (size_t i = 0; i < params.count(); ++i) {
      std::vector<double>& p = params.tensor(i).values;
      const std::vector<double>& g = grads.tensor(i).values;
      std::vector<double>& m = optim.first_moment[i].values;
      std::vector<double>& v = optim.second_moment[i].values;
      for (size_t j = 0; j < p.size(); ++j) {
        m[j] = b1 * m[j] + (1.0 - b1) * g[j];
        v[j] = b2 * v[j] + (1.0 - b2) * g[j] * g[j];
        p[j] -= lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + config.adam_epsilon);
      }
    }
  }
  params.Touch();
}

long double CrossEntropyExtended(const Tensor& logits, const LabelMap& gt) {
  const int k = logits.dim(0);
  const size_t plane = gt.size();
  long double total = 0.0L;
  size_t valid = 0;
  for (size_t p = 0; p < plane; ++p) {
    const uint8_t id = gt.ids()[p];
    if (id == label::kIgnore) continue;
    long double mx = logits.values[p];
    for (int c = 1; c < k; ++c) {
      mx = std::max<long double>(mx, logits.values[c * plane + p]);
    }
    long double sum = 0.0L;
    for (int c = 0; c < k; ++c)
      sum += std::exp(logits.values[c * plane + p] - mx);
    total += std::log(sum) + mx - logits.values[id * plane + p];
    ++valid;
  }
  return valid == 0 ? 0.0L : total / static_cast<long double>(valid);
}

void AppendActivations(const ForwardCache& cache, std::vector<bool>& out) {
  for (const auto* stages : {&cache.rgb_features, &cache.aux_features}) {
    for (const Tensor& f : *stages) {
      for (double v : f.values) out.push_back(v > 0.0);
    }
  }
}

std::string FormatDouble(double v) {
  std::ostringstream out;
  out << std::setprecision(std::numeric_limits<double>::max_digits10) << v;
  return out.str();
}

}  // namespace

const char* VariantName(Variant v) {
  switch (v) {
    case Variant::kBaseline:
      return "baseline";
    case Variant::kH:
      return "h";
    case Variant::kD:
      return "d";
    case Variant::kDH:
      return "dh";
  }
  return "unknown";
}

Variant ParseVariant(std::string_view name) {
  for (Variant v :
       {Variant::kBaseline, Variant::kH, Variant::kD, Variant::kDH}) {
    if (name == VariantName(v)) return v;
  }
  throw std::invalid_argument("unknown variant '" + std::string(name) +
                              "' (expected baseline, h, d or dh)");
}

void TrainConfig::SetVariant(Variant v) {
  double_pass = v == Variant::kD || v == Variant::kDH;
  multihead = v == Variant::kH || v == Variant::kDH;
}

void TrainConfig::Validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be finite and >= 0");
  }
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  if (batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
}

OptimState OptimState::For(const Params& params) {
  OptimState s;
  for (size_t i = 0; i < params.count(); ++i) {
    s.first_moment.emplace_back(params.tensor(i).shape);
    s.second_moment.emplace_back(params.tensor(i).shape);
  }
  return s;
}

LossBreakdown LossFirstPass(const PredictionSet& preds, const LabelMap& gt,
                            bool multihead) {
  LossBreakdown l;
  l.ce_joint = SoftmaxCrossEntropy(preds.z_joint, gt);
  if (multihead) {
    l.ce_head_rgb = SoftmaxCrossEntropy(RequireHead(preds.z_rgb, "RGB"), gt);
    l.ce_head_aux =
        SoftmaxCrossEntropy(RequireHead(preds.z_aux, "auxiliary"), gt);
  }
  l.l_f = l.ce_joint + l.ce_head_rgb + l.ce_head_aux;
  return l;
}

LossBreakdown LossSecondPass(const PredictionSet& masked_preds,
                             const LabelMap& gt, bool multihead) {
  LossBreakdown l;
  l.ce_masked_joint = SoftmaxCrossEntropy(masked_preds.z_joint, gt);
  if (multihead) {
    l.ce_masked_aux =
        SoftmaxCrossEntropy(RequireHead(masked_preds.z_aux, "auxiliary"), gt);
  }
  l.l_s = l.ce_masked_joint + l.ce_masked_aux;
  return l;
}

LossBreakdown TotalLoss(const LossBreakdown& first, const LossBreakdown& second,
                        bool double_pass) {
  LossBreakdown l;
  l.ce_joint = first.ce_joint;
  l.ce_head_rgb = first.ce_head_rgb;
  l.ce_head_aux = first.ce_head_aux;
  l.l_f = first.l_f;
  if (double_pass) {
    l.ce_masked_joint = second.ce_masked_joint;
    l.ce_masked_aux = second.ce_masked_aux;
    l.l_s = second.l_s;
  }
  l.total = l.l_f + l.l_s;
  return l;
}

LossAndGradients ComputeLossAndGradients(const Params& params,
                                         const FrameBundle& bundle,
                                         const LabelMap& gt,
                                         const TrainConfig& config) {
  if (config.multihead && !params.config().multihead) {
    throw std::invalid_argument("variant needs modality heads the model lacks");
  }
  LossBreakdown first, second;

  const ForwardResult full = Forward(params, bundle);
  PredictionGrads up;
  std::tie(first.ce_joint, up.z_joint) =
      SoftmaxCrossEntropyWithGrad(full.predictions.z_joint, gt);
  if (config.multihead) {
    Tensor g;
    std::tie(first.ce_head_rgb, g) = SoftmaxCrossEntropyWithGrad(
        RequireHead(full.predictions.z_rgb, "RGB"), gt);
    up.z_rgb = std::move(g);
    std::tie(first.ce_head_aux, g) = SoftmaxCrossEntropyWithGrad(
        RequireHead(full.predictions.z_aux, "auxiliary"), gt);
    up.z_aux = std::move(g);
  }
  first.l_f = first.ce_joint + first.ce_head_rgb + first.ce_head_aux;
  Params grads = Backward(params, full.cache, up);

  if (config.double_pass) {
    const ForwardResult masked =
        Forward(params, bundle, ModalitySet{Modality::kRgb});
    PredictionGrads up2;
    std::tie(second.ce_masked_joint, up2.z_joint) =
        SoftmaxCrossEntropyWithGrad(masked.predictions.z_joint, gt);
    if (config.multihead) {
      Tensor g;
      std::tie(second.ce_masked_aux, g) = SoftmaxCrossEntropyWithGrad(
          RequireHead(masked.predictions.z_aux, "auxiliary"), gt);
      up2.z_aux = std::move(g);
    }
    second.l_s = second.ce_masked_joint + second.ce_masked_aux;
    AddScaled(grads, Backward(params, masked.cache, up2), 1.0);
  }
  return {TotalLoss(first, second, config.double_pass), std::move(grads)};
}

LossBreakdown TrainStep(Params& params, OptimState& optim,
                        std::span<const FrameBundle* const> batch,
                        const TrainConfig& config) {
  if (batch.empty()) throw std::invalid_argument("empty training batch");
  const double scale = 1.0 / static_cast<double>(batch.size());
  LossBreakdown mean;
  Params grads(params.config());
  for (const FrameBundle* frame : batch) {
    LossAndGradients lg =
        ComputeLossAndGradients(params, *frame, frame->labels, config);
    AddScaled(mean, lg.loss, scale);
    AddScaled(grads, lg.gradients, scale);
  }
  if (!std::isfinite(mean.total)) {
    throw TrainingError("non-finite loss at step " +
                        std::to_string(optim.step + 1) + ": " + Describe(mean));
  }
  ApplyUpdate(params, optim, grads, config);
  return mean;
}

TrainResult Train(const TrainConfig& config, ModelConfig model_config,
                  std::span<const FrameBundle> train,
                  std::span<const FrameBundle> val,
                  const EpochCallback& on_epoch) {
  config.Validate();
  if (train.empty() || val.empty()) {
    throw std::invalid_argument(
        "training and validation sets must be non-empty");
  }
  model_config.multihead = config.multihead;
  Params params = InitParams(model_config, config.seed);
  OptimState optim = OptimState::For(params);
  Rng shuffle(Rng::Mix(config.seed, kShuffleStream));

  TrainResult result;
  result.best = params;
  std::vector<size_t> order(train.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle.Shuffle(order);
    LossBreakdown epoch_loss;
    for (size_t start = 0; start < order.size();
         start += static_cast<size_t>(config.batch_size)) {
      const size_t end = std::min(
          order.size(), start + static_cast<size_t>(config.batch_size));
      std::vector<const FrameBundle*> batch;
      for (size_t i = start; i < end; ++i) batch.push_back(&train[order[i]]);
      const LossBreakdown step = TrainStep(params, optim, batch, config);
      AddScaled(epoch_loss, step,
                static_cast<double>(batch.size()) /
                    static_cast<double>(train.size()));
    }
    EpochLogRow row{epoch, epoch_loss, Evaluate(params, val).miou};
    if (row.val_miou &&
        (!result.best_val_miou || *row.val_miou > *result.best_val_miou)) {
      result.best_val_miou = row.val_miou;
      result.best_epoch = epoch;
      result.best = params;
    }
    result.log.push_back(row);
    if (on_epoch) on_epoch(row);
  }
  if (result.best_epoch == 0) {
    result.best = params;
    result.best_epoch = config.epochs;
  }
  return result;
}

void WriteEpochLog(const std::filesystem::path& path,
                   std::span<const EpochLogRow> rows) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error(path.string() + ": cannot open for writing");
  out << kEpochLogHeader << '\n';
  for (const EpochLogRow& r : rows) {
    const LossBreakdown& l = r.loss;
    out << r.epoch;
    for (double v :
         {l.ce_joint, l.ce_head_rgb, l.ce_head_aux, l.ce_masked_joint,
          l.ce_masked_aux, l.l_f, l.l_s, l.total}) {
      out << ',' << FormatDouble(v);
    }
    out << ',' << (r.val_miou ? FormatDouble(*r.val_miou) : "nan") << '\n';
  }
  out.flush();
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

std::vector<EpochLogRow> ReadEpochLog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error(path.string() + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || line != kEpochLogHeader) {
    throw std::runtime_error(path.string() + ": unexpected header");
  }
  std::vector<EpochLogRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::istringstream fields(line);
    std::string item;
    while (std::getline(fields, item, ',')) f.push_back(item);
    if (f.size() != 10) {
      throw std::runtime_error(path.string() + ": malformed row '" + line +
                               "'");
    }
    EpochLogRow r;
    r.epoch = std::stoi(f[0]);
    double* targets[] = {&r.loss.ce_joint,      &r.loss.ce_head_rgb,
                         &r.loss.ce_head_aux,   &r.loss.ce_masked_joint,
                         &r.loss.ce_masked_aux, &r.loss.l_f,
                         &r.loss.l_s,           &r.loss.total};
    for (int i = 0; i < 8; ++i) *targets[i] = std::stod(f[i + 1]);
    if (f[9] != "nan") r.val_miou = std::stod(f[9]);
    rows.push_back(r);
  }
  return rows;
}

GradCheckResult CheckGradients(
    Params& params, const Params& analytic,
    const std::function<LossProbe(const Params&)>& loss,
    const GradCheckOptions& options,
    const std::function<bool(const std::string&)>& select) {
  std::vector<size_t> tensors;
  std::vector<size_t> offsets;
  size_t total = 0;
  for (size_t i = 0; i < params.count(); ++i) {
    if (select && !select(params.name(i))) continue;
    tensors.push_back(i);
    offsets.push_back(total);
    total += params.tensor(i).size();
  }
  if (total == 0) throw std::invalid_argument("no parameters selected");

  const std::vector<bool> center = loss(params).activations;
  GradCheckResult result;
  Rng rng(options.seed);
  while (result.samples < options.samples) {
    const size_t flat = rng.Below(total);
    const size_t t = static_cast<size_t>(
        std::upper_bound(offsets.begin(), offsets.end(), flat) -
        offsets.begin() - 1);
    const size_t tensor = tensors[t];
    const size_t j = flat - offsets[t];
    double& theta = params.tensor(tensor).values[j];
    const double saved = theta;
    theta = saved + options.eps;
    params.Touch();
    const LossProbe plus = loss(params);
    theta = saved - options.eps;
    params.Touch();
    const LossProbe minus = loss(params);
    theta = saved;
    params.Touch();

    if (plus.activations != center || minus.activations != center) {
      if (++result.kink_skips > 10 * options.samples) {
        throw std::runtime_error(
            "gradient check: too many draws straddle rectifier kinks");
      }
      continue;
    }
    const double numeric =
        static_cast<double>((plus.loss - minus.loss) / (2.0L * options.eps));
    const double exact = analytic.tensor(tensor).values[j];
    const double denom = std::max({std::abs(exact), std::abs(numeric), 1e-12});
    const double rel = std::abs(exact - numeric) / denom;
    if (rel > result.max_rel_error || result.worst_parameter.empty()) {
      result.max_rel_error = rel;
      result.worst_parameter =
          params.name(tensor) + "[" + std::to_string(j) + "]";
      result.worst_analytic = exact;
      result.worst_numeric = numeric;
    }
    ++result.samples;
  }
  return result;
}

LossProbe ComposedLossExtended(const Params& params, const FrameBundle& bundle,
                               const LabelMap& gt, const TrainConfig& config) {
  LossProbe probe;
  const ForwardResult full = Forward(params, bundle);
  AppendActivations(full.cache, probe.activations);
  probe.loss = CrossEntropyExtended(full.predictions.z_joint, gt);
  if (config.multihead) {
    probe.loss +=
        CrossEntropyExtended(RequireHead(full.predictions.z_rgb, "RGB"), gt);
    probe.loss += CrossEntropyExtended(
        RequireHead(full.predictions.z_aux, "auxiliary"), gt);
  }
  if (config.double_pass) {
    const ForwardResult masked =
        Forward(params, bundle, ModalitySet{Modality::kRgb});
    AppendActivations(masked.cache, probe.activations);
    probe.loss += CrossEntropyExtended(masked.predictions.z_joint, gt);
    if (config.multihead) {
      probe.loss += CrossEntropyExtended(
          RequireHead(masked.predictions.z_aux, "auxiliary"), gt);
    }
  }
  return probe;
}

GradCheckResult GradCheck(const Params& params, const FrameBundle& bundle,
                          const LabelMap& gt, const TrainConfig& config,
                          const GradCheckOptions& options) {
  const LossAndGradients lg =
      ComputeLossAndGradients(params, bundle, gt, config);
  Params probe = params;
  auto loss = [&](const Params& p) {
    return ComposedLossExtended(p, bundle, gt, config);
  };
  return CheckGradients(probe, lg.gradients, loss, options);
}

Params JitterBiases(const Params& params, double scale, uint64_t seed) {
  Params out = params;
  Rng rng(seed);
  for (size_t i = 0; i < out.count(); ++i) {
    if (!out.name(i).ends_with(".bias")) continue;
    for (double& v : out.tensor(i).values) v = scale * rng.Normal();
  }
  out.Touch();
  return out;
}

}  // namespace seafuse
