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

#ifndef VOICE_EXPLAINERS_EXPLANATION_MAP_HPP_
#define VOICE_EXPLAINERS_EXPLANATION_MAP_HPP_

#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "voice/netcore/image.hpp"

namespace voice::explainers {

enum class Method { kGradCam, kGradCamPlusPlus, kGuidedBackprop, kSmoothGrad };

// "gradcam", "gradcampp", "guided_backprop", "smoothgrad".
std::string_view MethodName(Method method);
Method ParseMethod(std::string_view name);

struct NormalizationBounds {
  double raw_min = 0.0;
  double raw_max = 0.0;
  bool constant = true;
};

// Min-max normalization to [0,1]. A constant map (including all-zero)
// becomes all zeros rather than NaN.
NormalizationBounds NormalizeInPlace(net::Map2D& map);

// A saliency heatmap m = M(f, x, target), normalized to [0,1] at the input's
// spatial size.
struct ExplanationMap {
  net::Map2D values;
  Method method = Method::kGradCam;
  std::string target_desc;  // "logit(P)" or "loss(P,Q)"
  std::string layer_name;   // conv layer, or "input" for gradient methods
  NormalizationBounds bounds;
  // The raw map was constant (e.g. all activations or gradients vanished).
  bool degenerate = false;

  int height() const { return values.height; }
  int width() const { return values.width; }
};

// Writes `<stem>.png` (16-bit grayscale, round(v * 65535)) and `<stem>.json`
// with `metadata` plus height, width and encoding fields.
void WriteMapPng16(const std::filesystem::path& stem, const net::Map2D& map,
                   nlohmann::json metadata);
// Reads the PNG half back (quantized values).
net::Map2D ReadMapPng16(const std::filesystem::path& png_path);

nlohmann::json SidecarJson(const ExplanationMap& map);
void SaveExplanation(const std::filesystem::path& stem, const ExplanationMap& map);

}  // namespace voice::explainers

#endif  // VOICE_EXPLAINERS_EXPLANATION_MAP_HPP_
