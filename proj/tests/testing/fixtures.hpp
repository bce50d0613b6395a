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

// Shared helpers for the unit tests: small models, images and temp dirs.

#ifndef VOICE_TESTS_TESTING_FIXTURES_HPP_
#define VOICE_TESTS_TESTING_FIXTURES_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "voice/common/random.hpp"
#include "voice/netcore/image.hpp"
#include "voice/netcore/model.hpp"

namespace voice::testing {

// conv(3->4) relu pool conv(4->6) relu [6x4x4] flatten linear(96->num_classes):
// 4*27+4 + 6*36+6 + 96*n+n = 334 + 97n parameters; 1304 for n = 10.
inline std::vector<net::LayerSpec> ToyCnnLayers(int num_classes) {
  using K = net::LayerKind;
  return {
      {K::kConv2d, "conv1", 3, 4, 3}, {K::kRelu, "relu1"}, {K::kMaxPool2, "pool1"},
      {K::kConv2d, "conv2", 4, 6, 3}, {K::kRelu, "relu2"}, {K::kFlatten, "flatten"},
      {K::kLinear, "fc", 6 * 4 * 4, num_classes},
  };
}

inline net::Model MakeToyModel(std::uint64_t seed, int num_classes = 10, int side = 8) {
  auto layers = ToyCnnLayers(num_classes);
  layers.back().in = 6 * (side / 2) * (side / 2);
  return net::MakeModel("toy-cnn", net::Shape{3, side, side}, std::move(layers), seed);
}

// A 32x32-input toy model, small enough for fast protocol tests.
inline net::Model MakeSmallModel(std::uint64_t seed, int num_classes = 10) {
  using K = net::LayerKind;
  std::vector<net::LayerSpec> layers = {
      {K::kConv2d, "conv1", 3, 8, 3},  {K::kRelu, "relu1"},  {K::kMaxPool2, "pool1"},
      {K::kConv2d, "conv2", 8, 8, 3},  {K::kRelu, "relu2"},  {K::kMaxPool2, "pool2"},
      {K::kFlatten, "flatten"},        {K::kLinear, "fc", 8 * 8 * 8, num_classes},
  };
  return net::MakeModel("small-cnn", net::Shape{3, 32, 32}, std::move(layers), seed);
}

// Smooth random image in [0,1] with per-pixel texture.
inline net::ImageTensor RandomImage(int height, int width, std::uint64_t seed,
                                    std::string id = "img") {
  net::ImageTensor x;
  x.height = height;
  x.width = width;
  x.channels = 3;
  x.pixels.resize(static_cast<std::size_t>(height) * width * 3);
  x.norm_mean = {net::kDefaultNormMean, net::kDefaultNormMean, net::kDefaultNormMean};
  x.norm_std = {net::kDefaultNormStd, net::kDefaultNormStd, net::kDefaultNormStd};
  x.source_id = std::move(id);
  Rng rng(seed);
  const double fx = rng.Uniform(0.1, 0.5);
  const double fy = rng.Uniform(0.1, 0.5);
  for (int y = 0; y < height; ++y) {
    for (int xx = 0; xx < width; ++xx) {
      for (int c = 0; c < 3; ++c) {
        const double base = 0.5 + 0.3 * std::sin(fx * xx + fy * y + c);
        x.at(y, xx, c) = static_cast<float>(std::clamp(base + 0.15 * (rng.Uniform() - 0.5), 0.0, 1.0));
      }
    }
  }
  return x;
}

inline net::Map2D RandomMap(int height, int width, Rng& rng) {
  net::Map2D m(height, width);
  for (double& v : m.values) v = rng.Uniform();
  return m;
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path TempDir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("voice_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace voice::testing

#endif  // VOICE_TESTS_TESTING_FIXTURES_HPP_
