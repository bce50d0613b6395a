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

#include "voice/netcore/model.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <limits>

#include "voice/common/error.hpp"
#include "voice/common/hash.hpp"
#include "voice/netcore/resize.hpp"

namespace voice::net {
namespace {

std::atomic<std::uint64_t> g_backward_passes{0};

static_assert(std::endian::native == std::endian::little,
              "weight checksums and files assume a little-endian host");

}  // namespace

std::uint64_t BackwardPassCount() { return g_backward_passes.load(); }

PredictionRecord MakePrediction(std::span<const double> logits,
                                std::optional<int> label) {
  PredictionRecord record;
  record.logits.assign(logits.begin(), logits.end());
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  record.probs.resize(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) {
    record.probs[i] = std::exp(logits[i] - max_logit);
    total += record.probs[i];
  }
  for (double& p : record.probs) p /= total;
  record.predicted = static_cast<int>(
      std::max_element(record.probs.begin(), record.probs.end()) - record.probs.begin());
  if (label.has_value()) {
    if (*label < 0 || *label >= static_cast<int>(logits.size())) {
      throw Error(ErrorCode::kInvalidArgument, "label out of range");
    }
    record.label = label;
    record.correct = record.predicted == *label;
  }
  return record;
}

std::string BackpropTarget::Describe() const {
  if (kind == Kind::kLogit) return "logit(" + std::to_string(predicted) + ")";
  return "loss(" + std::to_string(predicted) + "," +
         (contrast ? std::to_string(*contrast) : std::string("?")) + ")";
}

void BackpropTarget::Validate(int num_classes) const {
  if (predicted < 0 || predicted >= num_classes) {
    throw Error(ErrorCode::kInvalidArgument, "P out of range: " + Describe());
  }
  if (kind == Kind::kLogit) return;
  if (!contrast.has_value()) {
    throw Error(ErrorCode::kInvalidArgument, "loss target requires a contrast class");
  }
  if (*contrast == predicted) {
    throw Error(ErrorCode::kInvalidArgument, "contrast class equals P: " + Describe());
  }
  if (*contrast < 0 || *contrast >= num_classes) {
    throw Error(ErrorCode::kInvalidArgument, "Q out of range: " + Describe());
  }
}

Objective Objective::FromTarget(const BackpropTarget& target) {
  if (target.kind == BackpropTarget::Kind::kLogit) return {Kind::kLogit, target.predicted};
  return {Kind::kCrossEntropy, target.contrast.value_or(-1)};
}

const LayerActivations& GradientResult::layer(std::string_view name) const {
  for (const LayerActivations& l : layers) {
    if (l.layer_name == name) return l;
  }
  throw Error(ErrorCode::kUnknownLayer, "layer not captured: " + std::string(name));
}

Model::Model(std::string architecture_id, Network<float> network)
    : architecture_id_(std::move(architecture_id)), network_(std::move(network)) {
  if (network_.input_shape().height < kMinImageSide ||
      network_.input_shape().width < kMinImageSide) {
    throw Error(ErrorCode::kShapeMismatch, "model input must be at least 8x8");
  }
}

Network<float>& Model::mutable_network() {
  checksum_.clear();
  memo_trace_.clear();
  memo_pixels_.clear();
  return network_;
}

std::vector<std::string> Model::explainable_layers() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < network_.layer_count(); ++i) {
    const Shape& s = network_.output_shape(i);
    if (s.height >= 2 && s.width >= 2) names.push_back(network_.layers()[i].name);
  }
  return names;
}

std::string Model::default_explain_layer() const {
  const auto names = explainable_layers();
  if (names.empty()) {
    throw Error(ErrorCode::kUnknownLayer, "model has no spatial layer to explain");
  }
  return names.back();
}

std::string Model::weight_checksum() const {
  if (checksum_.empty()) {
    Sha256 h;
    h.Update(std::as_bytes(network_.params()));
    checksum_ = "sha256:" + h.HexDigest();
  }
  return checksum_;
}

Tensor<float> Model::PrepareInput(const ImageTensor& x) const {
  x.Validate();
  const Shape& in = network_.input_shape();
  if (x.channels != in.channels) {
    throw Error(ErrorCode::kShapeMismatch,
                "model expects " + std::to_string(in.channels) + " channels, got " +
                    std::to_string(x.channels));
  }
  const ImageTensor resized = Resize(x, in.height, in.width);
  Tensor<float> t(in);
  const std::size_t plane = in.plane();
  for (std::size_t p = 0; p < plane; ++p) {
    for (int c = 0; c < in.channels; ++c) {
      t.data[c * plane + p] =
          (resized.pixels[p * in.channels + c] - x.norm_mean[c]) / x.norm_std[c];
    }
  }
  return t;
}

const std::vector<Tensor<float>>& Model::TraceFor(const ImageTensor& x) {
  std::vector<float> norm = x.norm_mean;
  norm.insert(norm.end(), x.norm_std.begin(), x.norm_std.end());
  if (!memo_trace_.empty() && x.height == memo_height_ && x.width == memo_width_ &&
      x.pixels == memo_pixels_ && norm == memo_norm_) {
    return memo_trace_;
  }
  memo_trace_ = network_.ForwardTrace(PrepareInput(x));
  memo_pixels_ = x.pixels;
  memo_norm_ = std::move(norm);
  memo_height_ = x.height;
  memo_width_ = x.width;
  return memo_trace_;
}

PredictionRecord Model::Forward(const ImageTensor& x) { return Forward(x, std::nullopt); }

PredictionRecord Model::Forward(const ImageTensor& x, std::optional<int> label) {
  const auto& trace = TraceFor(x);
  const std::vector<double> logits(trace.back().data.begin(), trace.back().data.end());
  return MakePrediction(logits, label);
}

GradientResult Model::Backward(const ImageTensor& x, const BackpropTarget& target,
                               const GradientRequest& request) {
  target.Validate(num_classes());
  return BackwardObjective(x, Objective::FromTarget(target), request);
}

GradientResult Model::BackwardObjective(const ImageTensor& x, const Objective& objective,
                                        const GradientRequest& request) {
  const int n = num_classes();
  if (objective.cls < 0 || objective.cls >= n) {
    throw Error(ErrorCode::kInvalidArgument, "objective class out of range");
  }
  std::vector<std::size_t> layer_indices;
  for (const std::string& name : request.layers) {
    layer_indices.push_back(network_.LayerIndex(name));
  }
  const auto& trace = TraceFor(x);

  GradientResult result;
  const std::vector<double> logits(trace.back().data.begin(), trace.back().data.end());
  result.record = MakePrediction(logits);

  Tensor<float> grad_logits(trace.back().shape);
  if (objective.kind == Objective::Kind::kLogit) {
    result.objective = logits[objective.cls];
    grad_logits.data[objective.cls] = 1.0f;
  } else {
    const double max_logit = *std::max_element(logits.begin(), logits.end());
    double total = 0.0;
    for (double v : logits) total += std::exp(v - max_logit);
    const double log_z = max_logit + std::log(total);
    result.objective = log_z - logits[objective.cls];
    for (int k = 0; k < n; ++k) {
      const double p = result.record.probs[k];
      grad_logits.data[k] = static_cast<float>(p - (k == objective.cls ? 1.0 : 0.0));
    }
  }

  std::size_t stop = network_.layer_count();
  for (std::size_t idx : layer_indices) stop = std::min(stop, idx + 1);
  if (request.input_gradient) stop = 0;

  const auto grads = network_.Backward(trace, grad_logits, stop, request.relu_mode);
  g_backward_passes.fetch_add(1);

  for (std::size_t k = 0; k < layer_indices.size(); ++k) {
    const std::size_t t = layer_indices[k] + 1;
    LayerActivations la;
    la.layer_name = request.layers[k];
    la.shape = trace[t].shape;
    la.activations = trace[t].data;
    la.gradients = grads[t].data;
    result.layers.push_back(std::move(la));
  }

  if (request.input_gradient) {
    const Shape& in = network_.input_shape();
    const std::size_t plane = in.plane();
    std::vector<float> planar(grads[0].data.size());
    for (int c = 0; c < in.channels; ++c) {
      const float inv_std = 1.0f / x.norm_std[c];
      for (std::size_t p = 0; p < plane; ++p) {
        planar[c * plane + p] = grads[0].data[c * plane + p] * inv_std;
      }
    }
    const std::vector<float> source_planar = ResizePlanesBilinearAdjoint<float>(
        planar, in.channels, x.height, x.width, in.height, in.width);
    result.input_gradient.resize(x.pixels.size());
    const std::size_t src_plane = static_cast<std::size_t>(x.height) * x.width;
    for (std::size_t p = 0; p < src_plane; ++p) {
      for (int c = 0; c < in.channels; ++c) {
        result.input_gradient[p * in.channels + c] = source_planar[c * src_plane + p];
      }
    }
  }
  return result;
}

std::vector<LayerSpec> BundledCnnLayers(int num_classes) {
  using K = LayerKind;
  return {
      {K::kConv2d, "conv1", 3, 32, 3},    {K::kRelu, "relu1"},     {K::kMaxPool2, "pool1"},
      {K::kConv2d, "conv2", 32, 64, 3},   {K::kRelu, "relu2"},     {K::kMaxPool2, "pool2"},
      {K::kConv2d, "conv3", 64, 128, 3},  {K::kRelu, "relu3"},     {K::kMaxPool2, "pool3"},
      {K::kConv2d, "conv4", 128, 256, 3}, {K::kRelu, "relu4"},     {K::kFlatten, "flatten"},
      {K::kLinear, "fc1", 256 * 4 * 4, 192}, {K::kRelu, "relu5"},
      {K::kLinear, "fc2", 192, num_classes},
  };
}

Model MakeBundledModel(int num_classes, std::uint64_t seed) {
  return MakeModel(kBundledArchitectureId, Shape{3, 32, 32}, BundledCnnLayers(num_classes),
                   seed);
}

Model MakeModel(std::string architecture_id, Shape input, std::vector<LayerSpec> layers,
                std::uint64_t seed) {
  Network<float> network(input, std::move(layers));
  network.Initialize(seed);
  return Model(std::move(architecture_id), std::move(network));
}

}  // namespace voice::net
