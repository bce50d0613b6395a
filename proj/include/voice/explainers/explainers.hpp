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

#ifndef VOICE_EXPLAINERS_EXPLAINERS_HPP_
#define VOICE_EXPLAINERS_EXPLAINERS_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "voice/explainers/explanation_map.hpp"
#include "voice/netcore/model.hpp"

namespace voice::explainers {

// Gradient-based attribution methods behind one interface. Every explainer
// accepts both target kinds: logit(P) for the ordinary explanation and
// loss(P,Q) for a contrastive one. Only the backpropagated scalar differs.
class Explainer {
 public:
  virtual ~Explainer() = default;

  virtual Method method() const = 0;
  // Layer the map is read from, or "input".
  virtual std::string layer() const = 0;
  // Configuration that affects outputs, for cache keys.
  virtual std::string ConfigKey() const = 0;

  virtual ExplanationMap Explain(net::GradientSource& source, const net::ImageTensor& x,
                                 const net::BackpropTarget& target) const = 0;
};

// ReLU(sum_k w_k A^k) with w_k the spatial mean of dS/dA^k, at the layer's
// resolution and before normalization.
net::Map2D GradCamRaw(const net::LayerActivations& layer);

// GradCAM++ weights: w_k = sum_ij alpha_kij ReLU(g_kij) with
// alpha = g^2 / (2 g^2 + sum_ab A_ab g^3 + eps), alpha = 0 where g = 0.
net::Map2D GradCamPlusPlusRaw(const net::LayerActivations& layer);

// Collapses an HWC input gradient to one plane by channel max, optionally of
// absolute values.
net::Map2D ChannelMax(std::span<const float> gradient_hwc, int height, int width,
                      int channels, bool absolute);

// Vanilla input-gradient saliency: |dS/dx| channel-maxed and normalized.
ExplanationMap InputGradientMap(net::GradientSource& source, const net::ImageTensor& x,
                                const net::BackpropTarget& target);

class GradCam final : public Explainer {
 public:
  explicit GradCam(std::string layer) : layer_(std::move(layer)) {}
  Method method() const override { return Method::kGradCam; }
  std::string layer() const override { return layer_; }
  std::string ConfigKey() const override { return "gradcam@" + layer_; }
  ExplanationMap Explain(net::GradientSource& source, const net::ImageTensor& x,
                         const net::BackpropTarget& target) const override;

 private:
  std::string layer_;
};

class GradCamPlusPlus final : public Explainer {
 public:
  explicit GradCamPlusPlus(std::string layer) : layer_(std::move(layer)) {}
  Method method() const override { return Method::kGradCamPlusPlus; }
  std::string layer() const override { return layer_; }
  std::string ConfigKey() const override { return "gradcampp@" + layer_; }
  ExplanationMap Explain(net::GradientSource& source, const net::ImageTensor& x,
                         const net::BackpropTarget& target) const override;

 private:
  std::string layer_;
};

class GuidedBackprop final : public Explainer {
 public:
  Method method() const override { return Method::kGuidedBackprop; }
  std::string layer() const override { return "input"; }
  std::string ConfigKey() const override { return "guided_backprop"; }
  ExplanationMap Explain(net::GradientSource& source, const net::ImageTensor& x,
                         const net::BackpropTarget& target) const override;
};

inline constexpr int kDefaultSmoothGradSamples = 25;
inline constexpr double kDefaultSmoothGradSigmaFraction = 0.1;

// Mean input gradient over Gaussian-perturbed copies of x. Noise is seeded
// from (seed, x.source_id), so repeated calls on one image reuse the same
// perturbations regardless of the target.
class SmoothGrad final : public Explainer {
 public:
  // noise_sigma defaults to 0.1 * (max(x) - min(x)).
  SmoothGrad(int n_samples, std::optional<double> noise_sigma, std::uint64_t seed);
  Method method() const override { return Method::kSmoothGrad; }
  std::string layer() const override { return "input"; }
  std::string ConfigKey() const override;
  ExplanationMap Explain(net::GradientSource& source, const net::ImageTensor& x,
                         const net::BackpropTarget& target) const override;

 private:
  int n_samples_;
  std::optional<double> noise_sigma_;
  std::uint64_t seed_;
};

struct ExplainerOptions {
  std::string layer;  // used by the CAM methods
  int smoothgrad_samples = kDefaultSmoothGradSamples;
  std::optional<double> smoothgrad_sigma;
  std::uint64_t seed = 0;
};

std::unique_ptr<Explainer> MakeExplainer(std::string_view name, const ExplainerOptions& options);

}  // namespace voice::explainers

#endif  // VOICE_EXPLAINERS_EXPLAINERS_HPP_
