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

#ifndef VOICE_NETCORE_IMAGE_HPP_
#define VOICE_NETCORE_IMAGE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voice/common/image_io.hpp"

namespace voice::net {

inline constexpr int kMinImageSide = 8;

// An input image in [0,1], interleaved HWC, with the per-channel
// normalization the model applies before inference.
struct ImageTensor {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<float> pixels;
  std::vector<float> norm_mean;
  std::vector<float> norm_std;
  std::string source_id;

  ImageTensor() = default;
  ImageTensor(int h, int w, int c, float fill = 0.0f);

  float& at(int y, int x, int c) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  float at(int y, int x, int c) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::size_t size() const { return pixels.size(); }

  // Throws kShapeMismatch / kNonFinite / kInvalidArgument on a broken invariant.
  void Validate() const;
};

// Default normalization used by the bundled recipe.
inline constexpr float kDefaultNormMean = 0.5f;
inline constexpr float kDefaultNormStd = 0.25f;

ImageTensor FromRaster(const Raster8& raster, std::string source_id);
Raster8 ToRaster(const ImageTensor& image);

// Bilinear resize of pixels; metadata is carried over.
ImageTensor Resize(const ImageTensor& image, int height, int width);

// Per-channel planes (CHW) <-> interleaved pixels.
std::vector<float> ToPlanar(const ImageTensor& image);
void FromPlanar(std::span<const float> planar, ImageTensor& image);

// Single-channel double-valued map, row-major. Used for explanations and
// uncertainty maps.
struct Map2D {
  int height = 0;
  int width = 0;
  std::vector<double> values;

  Map2D() = default;
  Map2D(int h, int w, double fill = 0.0)
      : height(h), width(w), values(static_cast<std::size_t>(h) * w, fill) {}

  double& at(int y, int x) { return values[static_cast<std::size_t>(y) * width + x]; }
  double at(int y, int x) const { return values[static_cast<std::size_t>(y) * width + x]; }
  std::size_t size() const { return values.size(); }
  bool SameShape(const Map2D& other) const {
    return height == other.height && width == other.width;
  }
};

Map2D ResizeMap(const Map2D& map, int height, int width);

// Hadamard product of every channel with the map, bilinearly upsampled to the
// image's size first. Values stay in [0,1] when the map is.
ImageTensor MaskImage(const ImageTensor& image, const Map2D& mask);

}  // namespace voice::net

#endif  // VOICE_NETCORE_IMAGE_HPP_
