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

#include "voice/harness/overlay.hpp"

#include <algorithm>
#include <cmath>

#include "voice/common/error.hpp"

namespace voice::harness {
namespace {

std::uint8_t Quantize(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

void Blit(const Raster8& src, int scale, int x0, Raster8& dst) {
  for (int y = 0; y < src.height * scale; ++y) {
    for (int x = 0; x < src.width * scale; ++x) {
      const std::size_t s = (static_cast<std::size_t>(y / scale) * src.width + x / scale) * 3;
      const std::size_t d = (static_cast<std::size_t>(y) * dst.width + x0 + x) * 3;
      std::copy_n(src.data.begin() + s, 3, dst.data.begin() + d);
    }
  }
}

}  // namespace

std::array<double, 3> JetColor(double v) {
  v = std::clamp(v, 0.0, 1.0);
  auto ramp = [v](double center) { return std::clamp(1.5 - std::abs(4.0 * v - center), 0.0, 1.0); };
  return {ramp(3.0), ramp(2.0), ramp(1.0)};
}

Raster8 BlendHeat(const net::ImageTensor& image, const net::Map2D& map, double alpha) {
  if (image.channels != 3 && image.channels != 1) {
    throw Error(ErrorCode::kShapeMismatch, "overlay needs a gray or RGB image");
  }
  const net::Map2D heat = (map.height == image.height && map.width == image.width)
                              ? map
                              : net::ResizeMap(map, image.height, image.width);
  Raster8 out;
  out.width = image.width;
  out.height = image.height;
  out.channels = 3;
  out.data.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double v = std::clamp(heat.at(y, x), 0.0, 1.0);
      const auto color = JetColor(v);
      for (int c = 0; c < 3; ++c) {
        const double px = image.at(y, x, image.channels == 3 ? c : 0);
        const double blended = (1.0 - alpha * v) * px + alpha * v * color[c];
        out.data[(static_cast<std::size_t>(y) * out.width + x) * 3 + c] = Quantize(blended);
      }
    }
  }
  return out;
}

Raster8 ComposePanels(const net::ImageTensor& image, const net::Map2D& explanation,
                      const net::Map2D& voice, int scale) {
  if (scale < 1) throw Error(ErrorCode::kInvalidArgument, "overlay scale must be >= 1");
  const Raster8 panels[3] = {BlendHeat(image, net::Map2D(image.height, image.width)),
                             BlendHeat(image, explanation), BlendHeat(image, voice)};
  const int pw = image.width * scale;
  Raster8 out;
  out.width = 3 * pw + 2 * kPanelGap;
  out.height = image.height * scale;
  out.channels = 3;
  out.data.assign(static_cast<std::size_t>(out.width) * out.height * 3, 255);
  for (int i = 0; i < 3; ++i) Blit(panels[i], scale, i * (pw + kPanelGap), out);
  return out;
}

void RenderOverlay(const std::filesystem::path& path, const net::ImageTensor& image,
                   const net::Map2D& explanation, const net::Map2D& voice, int scale) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  WritePng8(path, ComposePanels(image, explanation, voice, scale));
}

}  // namespace voice::harness
