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

#include "seafuse/model.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "seafuse/random.h"

namespace seafuse {
namespace {

constexpr int kRgbChannels = 3;
constexpr int kAuxChannels = 2;

std::string Key(const std::string& prefix, int stage, const char* what) {
  return prefix + "." + std::to_string(stage) + "." + what;
}

std::vector<std::string> HeadNames(const ModelConfig& config) {
  if (config.multihead) return {"head_joint", "head_rgb", "head_aux"};
  return {"head_joint"};
}

// ---------------------------------------------------------------------------
// Layers. Feature maps are [C, H, W] tensors.

// 3x3 convolution, stride 2, zero padding 1, followed by ReLU.
Tensor ConvDownForward(const Tensor& in, const Tensor& weight,
                       const Tensor& bias) {
  const int cin = in.dim(0), h = in.dim(1), w = in.dim(2);
  const int cout = weight.dim(0);
  const int ho = h / 2, wo = w / 2;
  Tensor out({cout, ho, wo});
  for (int co = 0; co < cout; ++co) {
    double* o = out.data() + static_cast<size_t>(co) * ho * wo;
    std::fill(o, o + ho * wo, bias.values[co]);
    for (int ci = 0; ci < cin; ++ci) {
      const double* src = in.data() + static_cast<size_t>(ci) * h * w;
      const double* k =
          weight.data() + (static_cast<size_t>(co) * cin + ci) * 9;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const double wv = k[ky * 3 + kx];
          const int ox0 = kx == 0 ? 1 : 0;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = 2 * oy - 1 + ky;
            if (iy < 0 || iy >= h) continue;
            const double* row = src + static_cast<size_t>(iy) * w;
            double* orow = o + static_cast<size_t>(oy) * wo;
            for (int ox = ox0; ox < wo; ++ox) {
              orow[ox] += wv * row[2 * ox - 1 + kx];
            }
          }
        }
      }
    }
  }
  for (double& v : out.values) v = v > 0.0 ? v : 0.0;
  return out;
}

// Accumulates weight/bias gradients; returns the input gradient when asked.
void ConvDownBackward(const Tensor& in, const Tensor& weight, const Tensor& out,
                      const Tensor& grad_out, Tensor& grad_weight,
                      Tensor& grad_bias, Tensor* grad_in) {
  const int cin = in.dim(0), h = in.dim(1), w = in.dim(2);
  const int cout = weight.dim(0);
  const int ho = h / 2, wo = w / 2;
  const size_t plane = static_cast<size_t>(ho) * wo;
  std::vector<double> pre(plane);
  for (int co = 0; co < cout; ++co) {
    const double* g = grad_out.data() + co * plane;
    const double* o = out.data() + co * plane;
    double bias_sum = 0.0;
    for (size_t i = 0; i < plane; ++i) {
      pre[i] = o[i] > 0.0 ? g[i] : 0.0;
      bias_sum += pre[i];
    }
    grad_bias.values[co] += bias_sum;
    for (int ci = 0; ci < cin; ++ci) {
      const double* src = in.data() + static_cast<size_t>(ci) * h * w;
      const size_t kbase = (static_cast<size_t>(co) * cin + ci) * 9;
      double* dsrc =
          grad_in ? grad_in->data() + static_cast<size_t>(ci) * h * w : nullptr;
      for (int ky = 0; ky < 3; ++ky) {
        for (int kx = 0; kx < 3; ++kx) {
          const double wv = weight.values[kbase + ky * 3 + kx];
          const int ox0 = kx == 0 ? 1 : 0;
          double acc = 0.0;
          for (int oy = 0; oy < ho; ++oy) {
            const int iy = 2 * oy - 1 + ky;
            if (iy < 0 || iy >= h) continue;
            const double* row = src + static_cast<size_t>(iy) * w;
            const double* prow = pre.data() + static_cast<size_t>(oy) * wo;
            for (int ox = ox0; ox < wo; ++ox) {
              acc += prow[ox] * row[2 * ox - 1 + kx];
            }
            if (dsrc) {
              double* drow = dsrc + static_cast<size_t>(iy) * w;
              for (int ox = ox0; ox < wo; ++ox) {
                drow[2 * ox - 1 + kx] += wv * prow[ox];
              }
            }
          }
          grad_weight.values[kbase + ky * 3 + kx] += acc;
        }
      }
    }
  }
}

// out[o, p] = bias[o] + sum_i weight[o, i] * in[i, p].
Tensor Pointwise(const Tensor& in, const Tensor& weight, const Tensor* bias) {
  const int cin = in.dim(0);
  const int cout = weight.dim(0);
  const size_t plane = static_cast<size_t>(in.dim(1)) * in.dim(2);
  Tensor out({cout, in.dim(1), in.dim(2)});
  for (int o = 0; o < cout; ++o) {
    double* dst = out.data() + o * plane;
    if (bias) std::fill(dst, dst + plane, bias->values[o]);
    for (int i = 0; i < cin; ++i) {
      const double wv = weight.values[static_cast<size_t>(o) * cin + i];
      const double* src = in.data() + i * plane;
      for (size_t p = 0; p < plane; ++p) dst[p] += wv * src[p];
    }
  }
  return out;
}

void PointwiseBackward(const Tensor& in, const Tensor& weight,
                       const Tensor& grad_out, Tensor& grad_weight,
                       Tensor* grad_bias, Tensor* grad_in) {
  const int cin = in.dim(0);
  const int cout = weight.dim(0);
  const size_t plane = static_cast<size_t>(in.dim(1)) * in.dim(2);
  for (int o = 0; o < cout; ++o) {
    const double* g = grad_out.data() + o * plane;
    if (grad_bias) {
      double s = 0.0;
      for (size_t p = 0; p < plane; ++p) s += g[p];
      grad_bias->values[o] += s;
    }
    for (int i = 0; i < cin; ++i) {
      const double* src = in.data() + i * plane;
      double acc = 0.0;
      for (size_t p = 0; p < plane; ++p) acc += g[p] * src[p];
      grad_weight.values[static_cast<size_t>(o) * cin + i] += acc;
      if (grad_in) {
        const double wv = weight.values[static_cast<size_t>(o) * cin + i];
        double* d = grad_in->data() + i * plane;
        for (size_t p = 0; p < plane; ++p) d[p] += wv * g[p];
      }
    }
  }
}

// Two-tap linear interpolation weights for upsampling n -> n * factor with
// half-pixel centers and edge clamping.
struct Taps {
  std::vector<int> lo, hi;
  std::vector<double> w_lo, w_hi;
};

Taps MakeTaps(int n, int factor) {
  const int m = n * factor;
  Taps t;
  t.lo.resize(m);
  t.hi.resize(m);
  t.w_lo.resize(m);
  t.w_hi.resize(m);
  for (int o = 0; o < m; ++o) {
    const double src = (o + 0.5) / factor - 0.5;
    const int i0 = static_cast<int>(std::floor(src));
    const double frac = src - i0;
    t.lo[o] = std::clamp(i0, 0, n - 1);
    t.hi[o] = std::clamp(i0 + 1, 0, n - 1);
    t.w_lo[o] = 1.0 - frac;
    t.w_hi[o] = frac;
  }
  return t;
}

// Adds the bilinear upsampling of `in` ([C, h, w]) into `out` ([C, H, W]).
void UpsampleAdd(const Tensor& in, Tensor& out) {
  const int c = in.dim(0), h = in.dim(1), w = in.dim(2);
  const int oh = out.dim(1), ow = out.dim(2);
  const Taps ty = MakeTaps(h, oh / h), tx = MakeTaps(w, ow / w);
  std::vector<double> rows(static_cast<size_t>(h) * ow);
  for (int ch = 0; ch < c; ++ch) {
    const double* src = in.data() + static_cast<size_t>(ch) * h * w;
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < ow; ++x) {
        rows[static_cast<size_t>(y) * ow + x] =
            tx.w_lo[x] * src[y * w + tx.lo[x]] +
            tx.w_hi[x] * src[y * w + tx.hi[x]];
      }
    }
    double* dst = out.data() + static_cast<size_t>(ch) * oh * ow;
    for (int y = 0; y < oh; ++y) {
      const double* a = rows.data() + static_cast<size_t>(ty.lo[y]) * ow;
      const double* b = rows.data() + static_cast<size_t>(ty.hi[y]) * ow;
      double* d = dst + static_cast<size_t>(y) * ow;
      for (int x = 0; x < ow; ++x)
        d[x] += ty.w_lo[y] * a[x] + ty.w_hi[y] * b[x];
    }
  }
}

// Adjoint of UpsampleAdd: accumulates into `grad_in` ([C, h, w]).
void UpsampleAdjoint(const Tensor& grad_out, Tensor& grad_in) {
  const int c = grad_in.dim(0), h = grad_in.dim(1), w = grad_in.dim(2);
  const int oh = grad_out.dim(1), ow = grad_out.dim(2);
  const Taps ty = MakeTaps(h, oh / h), tx = MakeTaps(w, ow / w);
  std::vector<double> rows(static_cast<size_t>(h) * ow);
  for (int ch = 0; ch < c; ++ch) {
    std::fill(rows.begin(), rows.end(), 0.0);
    const double* g = grad_out.data() + static_cast<size_t>(ch) * oh * ow;
    for (int y = 0; y < oh; ++y) {
      double* a = rows.data() + static_cast<size_t>(ty.lo[y]) * ow;
      double* b = rows.data() + static_cast<size_t>(ty.hi[y]) * ow;
      const double* gr = g + static_cast<size_t>(y) * ow;
      for (int x = 0; x < ow; ++x) {
        a[x] += ty.w_lo[y] * gr[x];
        b[x] += ty.w_hi[y] * gr[x];
      }
    }
    double* dst = grad_in.data() + static_cast<size_t>(ch) * h * w;
    for (int y = 0; y < h; ++y) {
      const double* r = rows.data() + static_cast<size_t>(y) * ow;
      for (int x = 0; x < ow; ++x) {
        dst[y * w + tx.lo[x]] += tx.w_lo[x] * r[x];
        dst[y * w + tx.hi[x]] += tx.w_hi[x] * r[x];
      }
    }
  }
}

// Decoder head: every stage's features are projected to class logits,
// upsampled to full resolution and summed.
Tensor HeadForward(const Params& params, const std::string& head,
                   const std::vector<Tensor>& features) {
  const ModelConfig& cfg = params.config();
  Tensor logits({cfg.classes, cfg.height, cfg.width});
  const Tensor& bias = params.Get(head + ".bias");
  const size_t plane = static_cast<size_t>(cfg.height) * cfg.width;
  for (int k = 0; k < cfg.classes; ++k) {
    std::fill(logits.data() + k * plane, logits.data() + (k + 1) * plane,
              bias.values[k]);
  }
  for (int s = 0; s < cfg.stages(); ++s) {
    const Tensor proj =
        Pointwise(features[s], params.Get(Key(head, s, "weight")), nullptr);
    UpsampleAdd(proj, logits);
  }
  return logits;
}

void HeadBackward(const Params& params, const std::string& head,
                  const std::vector<Tensor>& features, const Tensor& grad,
                  Params& grads, std::vector<Tensor>& grad_features) {
  const ModelConfig& cfg = params.config();
  Tensor& gbias = grads.Get(head + ".bias");
  const size_t plane = static_cast<size_t>(cfg.height) * cfg.width;
  for (int k = 0; k < cfg.classes; ++k) {
    double s = 0.0;
    for (size_t p = 0; p < plane; ++p) s += grad.values[k * plane + p];
    gbias.values[k] += s;
  }
  for (int s = 0; s < cfg.stages(); ++s) {
    Tensor gproj({cfg.classes, features[s].dim(1), features[s].dim(2)});
    UpsampleAdjoint(grad, gproj);
    const std::string key = Key(head, s, "weight");
    PointwiseBackward(features[s], params.Get(key), gproj, grads.Get(key),
                      nullptr, &grad_features[s]);
  }
}

double Sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                  : std::exp(x) / (1.0 + std::exp(x));
}

Tensor Concat(const Tensor& a, const Tensor& b) {
  Tensor out({a.dim(0) + b.dim(0), a.dim(1), a.dim(2)});
  std::copy(a.values.begin(), a.values.end(), out.values.begin());
  std::copy(b.values.begin(), b.values.end(), out.values.begin() + a.size());
  return out;
}

bool AllZero(const Tensor& t) {
  return std::all_of(t.values.begin(), t.values.end(),
                     [](double v) { return v == 0.0; });
}

ForwardResult RunForward(const Params& params, const FrameBundle& input,
                         ModalitySet mask, bool modality_heads) {
  const ModelConfig& cfg = params.config();
  if (input.width() != cfg.width || input.height() != cfg.height ||
      input.rgb.width() != cfg.width || input.rgb.height() != cfg.height ||
      input.rgb.channels() != 3 || !input.thermal.SameShape(input.lidar) ||
      input.thermal.width() != cfg.width ||
      input.thermal.height() != cfg.height || input.thermal.channels() != 1) {
    std::ostringstream msg;
    msg << "bundle of size " << input.width() << "x" << input.height()
        << " does not match the model input " << cfg.width << "x" << cfg.height;
    throw std::invalid_argument(msg.str());
  }

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.params = &params;
  cache.revision = params.revision();
  const int h = cfg.height, w = cfg.width;
  const size_t plane = static_cast<size_t>(h) * w;
  cache.rgb_input = Tensor({kRgbChannels, h, w});
  cache.aux_input = Tensor({kAuxChannels, h, w});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const size_t p = static_cast<size_t>(y) * w + x;
      if (!mask.Contains(Modality::kRgb)) {
        for (int c = 0; c < kRgbChannels; ++c) {
          cache.rgb_input.values[c * plane + p] = input.rgb.at(x, y, c);
        }
      }
      if (!mask.Contains(Modality::kThermal)) {
        cache.aux_input.values[p] = input.thermal.at(x, y);
      }
      if (!mask.Contains(Modality::kLidar)) {
        cache.aux_input.values[plane + p] = input.lidar.at(x, y);
      }
    }
  }

  const Tensor* rgb = &cache.rgb_input;
  const Tensor* aux = &cache.aux_input;
  for (int s = 0; s < cfg.stages(); ++s) {
    cache.rgb_features.push_back(
        ConvDownForward(*rgb, params.Get(Key("rgb_encoder", s, "weight")),
                        params.Get(Key("rgb_encoder", s, "bias"))));
    cache.aux_features.push_back(
        ConvDownForward(*aux, params.Get(Key("aux_encoder", s, "weight")),
                        params.Get(Key("aux_encoder", s, "bias"))));
    rgb = &cache.rgb_features.back();
    aux = &cache.aux_features.back();

    Tensor gate =
        Pointwise(Concat(*rgb, *aux), params.Get(Key("fusion", s, "weight")),
                  &params.Get(Key("fusion", s, "bias")));
    for (double& v : gate.values) v = Sigmoid(v);
    Tensor fused = *rgb;
    for (size_t i = 0; i < fused.size(); ++i) {
      fused.values[i] += gate.values[i] * aux->values[i];
    }
    cache.gates.push_back(std::move(gate));
    cache.fused.push_back(std::move(fused));
  }

  PredictionSet& preds = result.predictions;
  preds.z_joint = HeadForward(params, "head_joint", cache.fused);
  if (cfg.multihead && modality_heads) {
    preds.z_rgb = HeadForward(params, "head_rgb", cache.rgb_features);
    preds.z_aux = HeadForward(params, "head_aux", cache.aux_features);
  }
  return result;
}

}  // namespace

Tensor::Tensor(std::vector<int> dims, double fill) : shape(std::move(dims)) {
  size_t n = 1;
  for (int d : shape) {
    if (d < 0) throw std::invalid_argument("negative tensor dimension");
    n *= static_cast<size_t>(d);
  }
  values.assign(n, fill);
}

void ModelConfig::Validate() const {
  if (channels.empty()) {
    throw std::invalid_argument("model needs at least one stage");
  }
  for (int c : channels) {
    if (c <= 0) throw std::invalid_argument("channel counts must be positive");
  }
  if (classes <= 0) throw std::invalid_argument("classes must be positive");
  const int div = 1 << stages();
  if (height <= 0 || width <= 0 || height % div != 0 || width % div != 0) {
    std::ostringstream msg;
    msg << "input " << width << "x" << height << " is not divisible by " << div
        << " (2^stages)";
    throw std::invalid_argument(msg.str());
  }
}

Params::Params(const ModelConfig& config) : config_(config) {
  config.Validate();
  const int k = config.classes;
  for (const char* branch : {"rgb_encoder", "aux_encoder"}) {
    int cin =
        std::string(branch) == "rgb_encoder" ? kRgbChannels : kAuxChannels;
    for (int s = 0; s < config.stages(); ++s) {
      const int cout = config.channels[s];
      tensors_.emplace_back(Key(branch, s, "weight"),
                            Tensor({cout, cin, 3, 3}));
      tensors_.emplace_back(Key(branch, s, "bias"), Tensor({cout}));
      cin = cout;
    }
  }
  for (int s = 0; s < config.stages(); ++s) {
    const int c = config.channels[s];
    tensors_.emplace_back(Key("fusion", s, "weight"), Tensor({c, 2 * c}));
    tensors_.emplace_back(Key("fusion", s, "bias"), Tensor({c}));
  }
  for (const std::string& head : HeadNames(config)) {
    for (int s = 0; s < config.stages(); ++s) {
      tensors_.emplace_back(Key(head, s, "weight"),
                            Tensor({k, config.channels[s]}));
    }
    tensors_.emplace_back(head + ".bias", Tensor({k}));
  }
}

Tensor& Params::Get(const std::string& name) {
  for (auto& [n, t] : tensors_) {
    if (n == name) return t;
  }
  throw std::out_of_range("no parameter named '" + name + "'");
}

const Tensor& Params::Get(const std::string& name) const {
  return const_cast<Params*>(this)->Get(name);
}

bool Params::Has(const std::string& name) const {
  return std::any_of(tensors_.begin(), tensors_.end(),
                     [&](const auto& nt) { return nt.first == name; });
}

size_t Params::ScalarCount() const {
  size_t n = 0;
  for (const auto& nt : tensors_) n += nt.second.size();
  return n;
}

bool Params::AllFinite() const {
  for (const auto& nt : tensors_) {
    for (double v : nt.second.values) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

bool Params::operator==(const Params& other) const {
  return config_ == other.config_ && tensors_ == other.tensors_;
}

Params InitParams(const ModelConfig& config, uint64_t seed) {
  Params params(config);
  int head_fan_in = 0;
  for (int c : config.channels) head_fan_in += c;
  for (size_t i = 0; i < params.count(); ++i) {
    const std::string& name = params.name(i);
    Tensor& t = params.tensor(i);
    if (name.ends_with("bias")) continue;
    double stddev;
    if (name.starts_with("head_")) {
      stddev = std::sqrt(1.0 / head_fan_in);
    } else if (name.starts_with("fusion")) {
      stddev = std::sqrt(1.0 / t.dim(1));
    } else {
      stddev = std::sqrt(2.0 / (t.dim(1) * 9.0));
    }
    Rng rng(Rng::Mix(seed, i));
    for (double& v : t.values) v = stddev * rng.Normal();
  }
  return params;
}

FrameBundle MaskModality(const FrameBundle& bundle, Modality modality) {
  FrameBundle out = bundle;
  Image* target = nullptr;
  switch (modality) {
    case Modality::kRgb:
      target = &out.rgb;
      break;
    case Modality::kThermal:
      target = &out.thermal;
      break;
    case Modality::kLidar:
      target = &out.lidar;
      break;
  }
  if (!target) throw std::invalid_argument("unknown modality");
  std::fill(target->data().begin(), target->data().end(), 0.0);
  return out;
}

ForwardResult Forward(const Params& params, const FrameBundle& bundle,
                      ModalitySet mask) {
  return RunForward(params, bundle, mask, /*modality_heads=*/true);
}

Params Backward(const Params& params, const ForwardCache& cache,
                const PredictionGrads& upstream) {
  if (cache.params != &params || cache.revision != params.revision()) {
    throw std::logic_error(
        "stale forward cache: parameters changed since the forward pass");
  }
  const ModelConfig& cfg = params.config();
  const int stages = cfg.stages();
  Params grads(cfg);

  auto zeros_like = [](const std::vector<Tensor>& ts) {
    std::vector<Tensor> out;
    for (const Tensor& t : ts) out.emplace_back(t.shape);
    return out;
  };
  std::vector<Tensor> g_rgb = zeros_like(cache.rgb_features);
  std::vector<Tensor> g_aux = zeros_like(cache.aux_features);
  std::vector<Tensor> g_fused = zeros_like(cache.fused);

  HeadBackward(params, "head_joint", cache.fused, upstream.z_joint, grads,
               g_fused);
  if (upstream.z_rgb && !AllZero(*upstream.z_rgb)) {
    if (!cfg.multihead) throw std::invalid_argument("model has no RGB head");
    HeadBackward(params, "head_rgb", cache.rgb_features, *upstream.z_rgb, grads,
                 g_rgb);
  }
  if (upstream.z_aux && !AllZero(*upstream.z_aux)) {
    if (!cfg.multihead) {
      throw std::invalid_argument("model has no auxiliary head");
    }
    HeadBackward(params, "head_aux", cache.aux_features, *upstream.z_aux, grads,
                 g_aux);
  }

  for (int s = stages - 1; s >= 0; --s) {
    const Tensor& r = cache.rgb_features[s];
    const Tensor& a = cache.aux_features[s];
    const Tensor& g = cache.gates[s];
    const Tensor& df = g_fused[s];
    Tensor du(g.shape);
    for (size_t i = 0; i < df.size(); ++i) {
      g_rgb[s].values[i] += df.values[i];
      g_aux[s].values[i] += df.values[i] * g.values[i];
      du.values[i] =
          df.values[i] * a.values[i] * g.values[i] * (1.0 - g.values[i]);
    }
    Tensor g_cat({2 * r.dim(0), r.dim(1), r.dim(2)});
    PointwiseBackward(Concat(r, a), params.Get(Key("fusion", s, "weight")), du,
                      grads.Get(Key("fusion", s, "weight")),
                      &grads.Get(Key("fusion", s, "bias")), &g_cat);
    for (size_t i = 0; i < r.size(); ++i) {
      g_rgb[s].values[i] += g_cat.values[i];
      g_aux[s].values[i] += g_cat.values[r.size() + i];
    }

    for (const char* branch : {"rgb_encoder", "aux_encoder"}) {
      const bool is_rgb = std::string(branch) == "rgb_encoder";
      const std::vector<Tensor>& feats =
          is_rgb ? cache.rgb_features : cache.aux_features;
      std::vector<Tensor>& gfeats = is_rgb ? g_rgb : g_aux;
      const Tensor& in =
          s == 0 ? (is_rgb ? cache.rgb_input : cache.aux_input) : feats[s - 1];
      ConvDownBackward(in, params.Get(Key(branch, s, "weight")), feats[s],
                       gfeats[s], grads.Get(Key(branch, s, "weight")),
                       grads.Get(Key(branch, s, "bias")),
                       s == 0 ? nullptr : &gfeats[s - 1]);
    }
  }
  return grads;
}

std::pair<double, Tensor> SoftmaxCrossEntropyWithGrad(const Tensor& logits,
                                                      const LabelMap& labels,
                                                      double scale) {
  if (logits.shape.size() != 3 || logits.dim(1) != labels.height() ||
      logits.dim(2) != labels.width()) {
    throw std::invalid_argument("logits and labels have different shapes");
  }
  const int k = logits.dim(0);
  const size_t plane = labels.size();
  Tensor grad(logits.shape);
  size_t valid = 0;
  for (uint8_t id : labels.ids()) valid += id != label::kIgnore;
  if (valid == 0) return {0.0, std::move(grad)};

  std::vector<double> prob(k);
  double total = 0.0;
  const double norm = scale / static_cast<double>(valid);
  for (size_t p = 0; p < plane; ++p) {
    const uint8_t id = labels.ids()[p];
    if (id == label::kIgnore) continue;
    if (id >= k) throw std::invalid_argument("label id exceeds class count");
    double mx = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < k; ++c) mx = std::max(mx, logits.values[c * plane + p]);
    double sum = 0.0;
    for (int c = 0; c < k; ++c) {
      prob[c] = std::exp(logits.values[c * plane + p] - mx);
      sum += prob[c];
    }
    total += std::log(sum) + mx - logits.values[id * plane + p];
    for (int c = 0; c < k; ++c) {
      grad.values[c * plane + p] =
          norm * (prob[c] / sum - (c == id ? 1.0 : 0.0));
    }
  }
  return {total / static_cast<double>(valid), std::move(grad)};
}

double SoftmaxCrossEntropy(const Tensor& logits, const LabelMap& labels) {
  return SoftmaxCrossEntropyWithGrad(logits, labels).first;
}

LabelMap ArgmaxLabels(const Tensor& logits) {
  const int k = logits.dim(0), h = logits.dim(1), w = logits.dim(2);
  const size_t plane = static_cast<size_t>(h) * w;
  LabelMap out(w, h, 0);
  for (size_t p = 0; p < plane; ++p) {
    int best = 0;
    for (int c = 1; c < k; ++c) {
      if (logits.values[c * plane + p] > logits.values[best * plane + p]) {
        best = c;
      }
    }
    out.ids()[p] = static_cast<uint8_t>(best);
  }
  return out;
}

LabelMap Predict(const Params& params, const FrameBundle& bundle,
                 ModalitySet mask) {
  return ArgmaxLabels(RunForward(params, bundle, mask, /*modality_heads=*/false)
                          .predictions.z_joint);
}

}  // namespace seafuse
