// Copyright 2026 The VOICE Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "voice/explainers/explainers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "voice/common/error.hpp"
#include "voice/common/random.hpp"

namespace voice::explainers {
namespace {

constexpr double kAlphaEps = 1e-8;

void CheckCamLayer(const net::LayerActivations& layer) {
  if (layer.shape.height < 2 || layer.shape.width < 2) {
    throw Error(ErrorCode::kShapeMismatch,
                "CAM layer '" + layer.layer_name + "' needs spatial extent >= 2x2");
  }
}

// Weighted channel sum followed by ReLU.
net::Map2D WeightedActivationSum(const net::LayerActivations& layer,
                                 const std::vector<double>& weights) {
  const int h = layer.shape.height;
  const int w = layer.shape.width;
  const std::size_t plane = layer.shape.plane();
  net::Map2D map(h, w);
  for (int k = 0; k < layer.shape.channels; ++k) {
    if (weights[k] == 0.0) continue;
    const float* a = layer.activations.data() + k * plane;
    for (std::size_t p = 0; p < plane; ++p) map.values[p] += weights[k] * a[p];
  }
  for (double& v : map.values) v = std::max(v, 0.0);
  return map;
}

ExplanationMap Finish(net::Map2D raw, Method method, const net::BackpropTarget& target,
                      std::string layer, int out_h, int out_w) {
  ExplanationMap out;
  out.method = method;
  out.target_desc = target.Describe();
  out.layer_name = std::move(layer);
  out.values = (raw.height == out_h && raw.width == out_w) ? std::move(raw)
                                                         : net::ResizeMap(raw, out_h, out_w);
  out.bounds = NormalizeInPlace(out.values);
  out.degenerate = out.bounds.constant;
  return out;
}

}  // namespace

net::Map2D GradCamRaw(const net::LayerActivations& layer) {
  CheckCamLayer(layer);
  const std::size_t plane = layer.shape.plane();
  std::vector<double> weights(layer.shape.channels, 0.0);
  for (int k = 0; k < layer.shape.channels; ++k) {
    const float* g = layer.gradients.data() + k * plane;
    double sum = 0.0;
    for (std::size_t p = 0; p < plane; ++p) sum += g[p];
    weights[k] = sum / static_cast<double>(plane);
  }
  return WeightedActivationSum(layer, weights);
}

net::Map2D GradCamPlusPlusRaw(const net::LayerActivations& layer) {
  CheckCamLayer(layer);
  const std::size_t plane = layer.shape.plane();
  std::vector<double> weights(layer.shape.channels, 0.0);
  for (int k = 0; k < layer.shape.channels; ++k) {
    const float* a = layer.activations.data() + k * plane;
    const float* g = layer.gradients.data() + k * plane;
    double activation_sum = 0.0;
    for (std::size_t p = 0; p < plane; ++p) activation_sum += a[p];
    double wk = 0.0;
    for (std::size_t p = 0; p < plane; ++p) {
      const double gij = g[p];
      if (gij == 0.0) continue;
      const double g2 = gij * gij;
      const double alpha = g2 / (2.0 * g2 + activation_sum * g2 * gij + kAlphaEps);
      wk += alpha * std::max(gij, 0.0);
    }
    weights[k] = wk;
  }
  return WeightedActivationSum(layer, weights);
}

net::Map2D ChannelMax(std::span<const float> gradient_hwc, int height, int width,
                      int channels, bool absolute) {
  net::Map2D map(height, width);
  for (std::size_t p = 0; p < map.values.size(); ++p) {
    double best = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < channels; ++c) {
      double v = gradient_hwc[p * channels + c];
      if (absolute) v = std::abs(v);
      best = std::max(best, v);
    }
    map.values[p] = best;
  }
  return map;
}

ExplanationMap InputGradientMap(net::GradientSource& source, const net::ImageTensor& x,
                                const net::BackpropTarget& target) {
  net::GradientRequest request;
  request.input_gradient = true;
  const net::GradientResult r = source.Backward(x, target, request);
  net::Map2D raw = ChannelMax(r.input_gradient, x.height, x.width, x.channels, true);
  return Finish(std::move(raw), Method::kSmoothGrad, target, "input", x.height, x.width);
}

ExplanationMap GradCam::Explain(net::GradientSource& source, const net::ImageTensor& x,
                                const net::BackpropTarget& target) const {
  net::GradientRequest request;
  request.layers = {layer_};
  const net::GradientResult r = source.Backward(x, target, request);
  return Finish(GradCamRaw(r.layer(layer_)), method(), target, layer_, x.height, x.width);
}

ExplanationMap GradCamPlusPlus::Explain(net::GradientSource& source,
                                        const net::ImageTensor& x,
                                        const net::BackpropTarget& target) const {
  net::GradientRequest request;
  request.layers = {layer_};
  const net::GradientResult r = source.Backward(x, target, request);
  return Finish(GradCamPlusPlusRaw(r.layer(layer_)), method(), target, layer_, x.height,
                x.width);
}

ExplanationMap GuidedBackprop::Explain(net::GradientSource& source,
                                       const net::ImageTensor& x,
                                       const net::BackpropTarget& target) const {
  net::GradientRequest request;
  request.input_gradient = true;
  request.relu_mode = net::ReluMode::kGuided;
  const net::GradientResult r = source.Backward(x, target, request);
  net::Map2D raw = ChannelMax(r.input_gradient, x.height, x.width, x.channels, false);
  return Finish(std::move(raw), method(), target, "input", x.height, x.width);
}

SmoothGrad::SmoothGrad(int n_samples, std::optional<double> noise_sigma, std::uint64_t seed)
    : n_samples_(n_samples), noise_sigma_(noise_sigma), seed_(seed) {
  if (n_samples_ < 1) throw Error(ErrorCode::kInvalidArgument, "smoothgrad needs n_samples >= 1");
  if (noise_sigma_.has_value() && !(*noise_sigma_ >= 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "smoothgrad noise_sigma must be >= 0");
  }
}

std::string SmoothGrad::ConfigKey() const {
  std::string key = "smoothgrad:n=" + std::to_string(n_samples_) + ":sigma=";
  key += noise_sigma_ ? std::to_string(*noise_sigma_) : std::string("auto");
  return key + ":seed=" + std::to_string(seed_);
}

ExplanationMap SmoothGrad::Explain(net::GradientSource& source, const net::ImageTensor& x,
                                   const net::BackpropTarget& target) const {
  double sigma = 0.0;
  if (noise_sigma_.has_value()) {
    sigma = *noise_sigma_;
  } else if (!x.pixels.empty()) {
    const auto [lo, hi] = std::minmax_element(x.pixels.begin(), x.pixels.end());
    sigma = kDefaultSmoothGradSigmaFraction * (*hi - *lo);
  }
  net::GradientRequest request;
  request.input_gradient = true;
  // Double accumulation keeps the zero-noise mean bitwise equal to one gradient.
  std::vector<double> mean(x.pixels.size(), 0.0);
  Rng rng(MixSeed(seed_, StableHash(x.source_id)));
  net::ImageTensor noisy = x;
  for (int s = 0; s < n_samples_; ++s) {
    if (sigma > 0.0) {
      for (std::size_t i = 0; i < x.pixels.size(); ++i) {
        // Noisy samples may leave [0,1]; clamp to keep a valid model input.
        noisy.pixels[i] = std::clamp(
            static_cast<float>(x.pixels[i] + sigma * rng.Normal()), 0.0f, 1.0f);
      }
    }
    const net::GradientResult r = source.Backward(noisy, target, request);
    for (std::size_t i = 0; i < mean.size(); ++i) mean[i] += r.input_gradient[i];
  }
  std::vector<float> averaged(mean.size());
  for (std::size_t i = 0; i < mean.size(); ++i) {
    averaged[i] = static_cast<float>(mean[i] / n_samples_);
  }
  net::Map2D raw = ChannelMax(averaged, x.height, x.width, x.channels, true);
  return Finish(std::move(raw), method(), target, "input", x.height, x.width);
}

std::unique_ptr<Explainer> MakeExplainer(std::string_view name,
                                         const ExplainerOptions& options) {
  switch (ParseMethod(name)) {
    case Method::kGradCam:
      return std::make_unique<GradCam>(options.layer);
    case Method::kGradCamPlusPlus:
      return std::make_unique<GradCamPlusPlus>(options.layer);
    case Method::kGuidedBackprop:
      return std::make_unique<GuidedBackprop>();
    case Method::kSmoothGrad:
      return std::make_unique<SmoothGrad>(options.smoothgrad_samples, options.smoothgrad_sigma,
                                          options.seed);
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown explainer");
}

}  // namespace voice::explainers
