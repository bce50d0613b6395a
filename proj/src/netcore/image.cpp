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

#include "voice/netcore/image.hpp"

#include <algorithm>
#include <cmath>

#include "voice/common/error.hpp"
#include "voice/netcore/resize.hpp"
#include "voice/netcore/tensor.hpp"

namespace voice::net {

std::string Shape::ToString() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" +
         std::to_string(width);
}

ImageTensor::ImageTensor(int h, int w, int c, float fill)
    : height(h),
      width(w),
      channels(c),
      pixels(static_cast<std::size_t>(h) * w * c, fill),
      norm_mean(c, kDefaultNormMean),
      norm_std(c, kDefaultNormStd) {}

void ImageTensor::Validate() const {
  if (height < kMinImageSide || width < kMinImageSide || channels <= 0) {
    throw Error(ErrorCode::kShapeMismatch,
                "image must be at least 8x8 with >=1 channel, got " +
                    std::to_string(height) + "x" + std::to_string(width) + "x" +
                    std::to_string(channels));
  }
  if (pixels.size() != static_cast<std::size_t>(height) * width * channels) {
    throw Error(ErrorCode::kShapeMismatch, "pixel buffer size does not match dims");
  }
  if (norm_mean.size() != static_cast<std::size_t>(channels) ||
      norm_std.size() != static_cast<std::size_t>(channels)) {
    throw Error(ErrorCode::kShapeMismatch, "normalization must be per channel");
  }
  for (float s : norm_std) {
    if (!(s > 0.0f) || !std::isfinite(s)) {
      throw Error(ErrorCode::kInvalidArgument, "norm_std must be positive");
    }
  }
  for (float v : pixels) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kNonFinite, "non-finite pixel");
    if (v < 0.0f || v > 1.0f) {
      throw Error(ErrorCode::kInvalidArgument, "pixel outside [0,1]");
    }
  }
}

ImageTensor FromRaster(const Raster8& raster, std::string source_id) {
  ImageTensor image(raster.height, raster.width, raster.channels);
  for (std::size_t i = 0; i < raster.data.size(); ++i) {
    image.pixels[i] = static_cast<float>(raster.data[i]) / 255.0f;
  }
  image.source_id = std::move(source_id);
  return image;
}

Raster8 ToRaster(const ImageTensor& image) {
  Raster8 raster;
  raster.height = image.height;
  raster.width = image.width;
  raster.channels = image.channels;
  raster.data.resize(image.pixels.size());
  for (std::size_t i = 0; i < image.pixels.size(); ++i) {
    const float v = std::clamp(image.pixels[i], 0.0f, 1.0f);
    raster.data[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  return raster;
}

std::vector<float> ToPlanar(const ImageTensor& image) {
  std::vector<float> planar(image.pixels.size());
  const std::size_t plane = static_cast<std::size_t>(image.height) * image.width;
  for (std::size_t p = 0; p < plane; ++p) {
    for (int c = 0; c < image.channels; ++c) {
      planar[c * plane + p] = image.pixels[p * image.channels + c];
    }
  }
  return planar;
}

void FromPlanar(std::span<const float> planar, ImageTensor& image) {
  const std::size_t plane = static_cast<std::size_t>(image.height) * image.width;
  for (std::size_t p = 0; p < plane; ++p) {
    for (int c = 0; c < image.channels; ++c) {
      image.pixels[p * image.channels + c] = planar[c * plane + p];
    }
  }
}

ImageTensor Resize(const ImageTensor& image, int height, int width) {
  if (image.height == height && image.width == width) return image;
  ImageTensor out = image;
  out.height = height;
  out.width = width;
  out.pixels.assign(static_cast<std::size_t>(height) * width * image.channels, 0.0f);
  const std::vector<float> planar = ToPlanar(image);
  const std::vector<float> resized = ResizePlanesBilinear<float>(
      planar, image.channels, image.height, image.width, height, width);
  FromPlanar(resized, out);
  return out;
}

Map2D ResizeMap(const Map2D& map, int height, int width) {
  Map2D out(height, width);
  out.values = ResizePlanesBilinear<double>(map.values, 1, map.height, map.width,
                                            height, width);
  return out;
}

ImageTensor MaskImage(const ImageTensor& image, const Map2D& mask) {
  if (mask.height <= 0 || mask.width <= 0 ||
      mask.values.size() != static_cast<std::size_t>(mask.height) * mask.width) {
    throw Error(ErrorCode::kShapeMismatch, "mask has an inconsistent shape");
  }
  const Map2D aligned = (mask.height == image.height && mask.width == image.width)
                            ? mask
                            : ResizeMap(mask, image.height, image.width);
  if (!aligned.SameShape(Map2D(image.height, image.width))) {
    throw Error(ErrorCode::kShapeMismatch, "mask does not align with image");
  }
  ImageTensor out = image;
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      const double m = aligned.at(y, x);
      for (int c = 0; c < image.channels; ++c) {
        out.at(y, x, c) = static_cast<float>(image.at(y, x, c) * m);
      }
    }
  }
  return out;
}

}  // namespace voice::net
