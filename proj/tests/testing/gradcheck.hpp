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

// Central finite differences in double precision against the model's float
// analytic gradients, through normalization and input resizing.

#ifndef VOICE_TESTS_TESTING_GRADCHECK_HPP_
#define VOICE_TESTS_TESTING_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "voice/netcore/model.hpp"
#include "voice/netcore/resize.hpp"

namespace voice::testing {

inline constexpr double kFiniteDifferenceStep = 1e-5;

struct GradCheckResult {
  double max_layer_error = 0.0;  // over all requested layers
  double max_input_error = 0.0;
  std::size_t checked = 0;
  // Entries at a kink (ReLU at zero, tied pooling inputs) where the one-sided
  // differences disagree; central differences are meaningless there.
  std::size_t skipped = 0;
};

namespace detail {

inline double ObjectiveOf(const net::Tensor<double>& logits, const net::BackpropTarget& target) {
  if (target.kind == net::BackpropTarget::Kind::kLogit) return logits.data[target.predicted];
  const double m = *std::max_element(logits.data.begin(), logits.data.end());
  double z = 0.0;
  for (double v : logits.data) z += std::exp(v - m);
  return m + std::log(z) - logits.data[*target.contrast];
}

// Normalized, resized network input in double precision.
inline net::Tensor<double> PrepareDouble(const net::ImageTensor& x, const net::Shape& in,
                                         const std::vector<double>& pixels) {
  const std::size_t src_plane = static_cast<std::size_t>(x.height) * x.width;
  std::vector<double> planar(pixels.size());
  for (std::size_t p = 0; p < src_plane; ++p) {
    for (int c = 0; c < x.channels; ++c) planar[c * src_plane + p] = pixels[p * x.channels + c];
  }
  const std::vector<double> resized = net::ResizePlanesBilinear<double>(
      planar, x.channels, x.height, x.width, in.height, in.width);
  net::Tensor<double> t(in);
  for (int c = 0; c < in.channels; ++c) {
    for (std::size_t p = 0; p < in.plane(); ++p) {
      t.data[c * in.plane() + p] =
          (resized[c * in.plane() + p] - double(x.norm_mean[c])) / double(x.norm_std[c]);
    }
  }
  return t;
}

}  // namespace detail

// Compares every layer-gradient entry of `layers` and every input-pixel
// gradient with central differences of step h.
inline GradCheckResult CheckGradients(net::Model& model, const net::ImageTensor& x,
                                      const net::BackpropTarget& target,
                                      const std::vector<std::string>& layers,
                                      double h = kFiniteDifferenceStep) {
  net::GradientRequest request;
  request.layers = layers;
  request.input_gradient = true;
  const net::GradientResult analytic = model.Backward(x, target, request);

  const net::Network<double> net = model.network().Cast<double>();
  const net::Shape& in = model.input_shape();
  std::vector<double> pixels(x.pixels.begin(), x.pixels.end());
  const auto trace = net.ForwardTrace(detail::PrepareDouble(x, in, pixels));

  const double center = detail::ObjectiveOf(trace.back(), target);
  GradCheckResult result;
  // Returns the central difference, or nullopt at a kink.
  auto difference = [&](double up, double down) -> std::optional<double> {
    const double forward = (up - center) / h;
    const double backward = (center - down) / h;
    if (std::abs(forward - backward) > 1e-3 * std::max(1.0, std::abs(forward))) {
      ++result.skipped;
      return std::nullopt;
    }
    ++result.checked;
    return (up - down) / (2 * h);
  };
  for (const net::LayerActivations& la : analytic.layers) {
    const std::size_t idx = net.LayerIndex(la.layer_name);
    for (std::size_t i = 0; i < la.gradients.size(); ++i) {
      net::Tensor<double> act = trace[idx + 1];
      act.data[i] += h;
      const double up = detail::ObjectiveOf(net.ForwardFrom(idx + 1, act), target);
      act.data[i] -= 2 * h;
      const double down = detail::ObjectiveOf(net.ForwardFrom(idx + 1, act), target);
      if (const auto fd = difference(up, down)) {
        result.max_layer_error =
            std::max(result.max_layer_error, std::abs(*fd - la.gradients[i]));
      }
    }
  }
  for (std::size_t i = 0; i < pixels.size(); ++i) {
    std::vector<double> moved = pixels;
    moved[i] += h;
    const double up =
        detail::ObjectiveOf(net.ForwardFrom(0, detail::PrepareDouble(x, in, moved)), target);
    moved[i] -= 2 * h;
    const double down =
        detail::ObjectiveOf(net.ForwardFrom(0, detail::PrepareDouble(x, in, moved)), target);
    if (const auto fd = difference(up, down)) {
      result.max_input_error =
          std::max(result.max_input_error, std::abs(*fd - analytic.input_gradient[i]));
    }
  }
  return result;
}

}  // namespace voice::testing

#endif  // VOICE_TESTS_TESTING_GRADCHECK_HPP_
