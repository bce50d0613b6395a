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

#include "voice/explainers/explanation_map.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "voice/common/error.hpp"
#include "voice/common/image_io.hpp"

namespace voice::explainers {

std::string_view MethodName(Method method) {
  switch (method) {
    case Method::kGradCam: return "gradcam";
    case Method::kGradCamPlusPlus: return "gradcampp";
    case Method::kGuidedBackprop: return "guided_backprop";
    case Method::kSmoothGrad: return "smoothgrad";
  }
  return "unknown";
}

Method ParseMethod(std::string_view name) {
  for (Method m : {Method::kGradCam, Method::kGradCamPlusPlus, Method::kGuidedBackprop,
                   Method::kSmoothGrad}) {
    if (MethodName(m) == name) return m;
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown explainer: " + std::string(name));
}

NormalizationBounds NormalizeInPlace(net::Map2D& map) {
  NormalizationBounds b;
  if (map.values.empty()) return b;
  const auto [lo, hi] = std::minmax_element(map.values.begin(), map.values.end());
  b.raw_min = *lo;
  b.raw_max = *hi;
  const double range = b.raw_max - b.raw_min;
  b.constant = !(range > 0.0) || !std::isfinite(range);
  if (b.constant) {
    std::fill(map.values.begin(), map.values.end(), 0.0);
    return b;
  }
  for (double& v : map.values) v = std::clamp((v - b.raw_min) / range, 0.0, 1.0);
  return b;
}

void WriteMapPng16(const std::filesystem::path& stem, const net::Map2D& map,
                   nlohmann::json metadata) {
  std::vector<std::uint16_t> samples(map.values.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    samples[i] = static_cast<std::uint16_t>(
        std::lround(std::clamp(map.values[i], 0.0, 1.0) * 65535.0));
  }
  std::filesystem::path png = stem;
  png += ".png";
  std::filesystem::path json = stem;
  json += ".json";
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  WritePngGray16(png, map.width, map.height, samples);
  metadata["height"] = map.height;
  metadata["width"] = map.width;
  metadata["encoding"] = "png16_gray: value = sample / 65535";
  std::ofstream out(json, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + json.string());
  out << metadata.dump(2) << "\n";
}

net::Map2D ReadMapPng16(const std::filesystem::path& png_path) {
  int w = 0;
  int h = 0;
  const auto samples = ReadPngGray16(png_path, &w, &h);
  net::Map2D map(h, w);
  for (std::size_t i = 0; i < samples.size(); ++i) map.values[i] = samples[i] / 65535.0;
  return map;
}

nlohmann::json SidecarJson(const ExplanationMap& map) {
  return {{"kind", "explanation"},
          {"method", MethodName(map.method)},
          {"target", map.target_desc},
          {"layer", map.layer_name},
          {"degenerate", map.degenerate},
          {"normalization",
           {{"scheme", "min-max"},
            {"raw_min", map.bounds.raw_min},
            {"raw_max", map.bounds.raw_max},
            {"constant", map.bounds.constant}}}};
}

void SaveExplanation(const std::filesystem::path& stem, const ExplanationMap& map) {
  WriteMapPng16(stem, map.values, SidecarJson(map));
}

}  // namespace voice::explainers
