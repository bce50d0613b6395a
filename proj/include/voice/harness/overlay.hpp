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

#ifndef VOICE_HARNESS_OVERLAY_HPP_
#define VOICE_HARNESS_OVERLAY_HPP_

#include <array>
#include <filesystem>

#include "voice/common/image_io.hpp"
#include "voice/netcore/image.hpp"

namespace voice::harness {

inline constexpr double kOverlayAlpha = 0.5;
inline constexpr int kPanelGap = 2;

// Jet colormap on [0,1]: dark blue -> cyan -> yellow -> dark red.
// r = clamp(1.5 - |4v - 3|), g = clamp(1.5 - |4v - 2|), b = clamp(1.5 - |4v - 1|).
std::array<double, 3> JetColor(double v);

// Heat blend, per pixel and channel in [0,1] units:
//   out = (1 - alpha * v) * image + alpha * v * jet(v),
// quantized with round(255 * out). A zero map leaves the image untouched.
// The map is bilinearly resized to the image first when shapes differ.
Raster8 BlendHeat(const net::ImageTensor& image, const net::Map2D& map,
                  double alpha = kOverlayAlpha);

// Three panels left to right: input, explanation overlay, VOICE overlay,
// separated by white gaps and upscaled by `scale` (nearest neighbour).
Raster8 ComposePanels(const net::ImageTensor& image, const net::Map2D& explanation,
                      const net::Map2D& voice, int scale = 1);

void RenderOverlay(const std::filesystem::path& path, const net::ImageTensor& image,
                   const net::Map2D& explanation, const net::Map2D& voice, int scale = 1);

}  // namespace voice::harness

#endif  // VOICE_HARNESS_OVERLAY_HPP_
