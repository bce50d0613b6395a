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

#ifndef VOICE_NETCORE_MODEL_HPP_
#define VOICE_NETCORE_MODEL_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voice/netcore/image.hpp"
#include "voice/netcore/network.hpp"

namespace voice::net {

// Output of one forward pass.
struct PredictionRecord {
  std::vector<double> logits;
  std::vector<double> probs;  // softmax(logits)
  int predicted = 0;          // argmax(probs), lowest index on ties
  std::optional<int> label;
  std::optional<bool> correct;

  int num_classes() const { return static_cast<int>(probs.size()); }
};

PredictionRecord MakePrediction(std::span<const double> logits,
                                std::optional<int> label = std::nullopt);

// The scalar an explainer backpropagates: the logit of the predicted class P,
// or the contrastive cross-entropy loss J(P, Q) = -log softmax(y)_Q.
struct BackpropTarget {
  enum class Kind { kLogit, kLoss };

  Kind kind = Kind::kLogit;
  int predicted = 0;
  std::optional<int> contrast;

  static BackpropTarget Logit(int predicted) { return {Kind::kLogit, predicted, {}}; }
  static BackpropTarget Loss(int predicted, int contrast) {
    return {Kind::kLoss, predicted, contrast};
  }

  // "logit(P)" or "loss(P,Q)".
  std::string Describe() const;
  // Throws kInvalidArgument when Q is missing, equals P, or a class is out of range.
  void Validate(int num_classes) const;

  bool operator==(const BackpropTarget&) const = default;
};

// Lower-level scalar objective: a single logit, or cross-entropy against a
// class. BackpropTarget maps onto this; the adversarial probe uses it directly.
struct Objective {
  enum class Kind { kLogit, kCrossEntropy };
  Kind kind = Kind::kLogit;
  int cls = 0;

  static Objective FromTarget(const BackpropTarget& target);
};

struct GradientRequest {
  std::vector<std::string> layers;   // capture activations and gradients here
  bool input_gradient = false;       // gradient w.r.t. the [0,1] input pixels
  ReluMode relu_mode = ReluMode::kStandard;
};

// Activations of a named layer and the gradient of the backpropagated scalar
// with respect to them (same CHW shape).
struct LayerActivations {
  std::string layer_name;
  Shape shape;
  std::vector<float> activations;
  std::vector<float> gradients;
};

struct GradientResult {
  PredictionRecord record;
  double objective = 0.0;
  std::vector<LayerActivations> layers;
  // HWC, same geometry as the image passed in (empty unless requested).
  std::vector<float> input_gradient;

  const LayerActivations& layer(std::string_view name) const;
};

// What explainers need from a model. Implementations may keep per-call state
// (e.g. a memoized forward pass), so one instance must not be shared across
// threads; replicate instead.
class GradientSource {
 public:
  virtual ~GradientSource() = default;

  virtual int num_classes() const = 0;
  virtual PredictionRecord Forward(const ImageTensor& x) = 0;
  virtual GradientResult Backward(const ImageTensor& x, const BackpropTarget& target,
                                  const GradientRequest& request) = 0;
};

// Number of backward passes executed by every Model in the process.
std::uint64_t BackwardPassCount();

// A classifier f(.) over images: architecture, weights and the gradient engine.
class Model final : public GradientSource {
 public:
  Model(std::string architecture_id, Network<float> network);

  const std::string& architecture_id() const { return architecture_id_; }
  int num_classes() const override { return network_.num_outputs(); }
  const Shape& input_shape() const { return network_.input_shape(); }
  const Network<float>& network() const { return network_; }
  Network<float>& mutable_network();

  // Layers with spatial extent (conv, relu, pool outputs) usable by GradCAM.
  std::vector<std::string> explainable_layers() const;
  // Output of the deepest layer that still has spatial extent >= 2x2.
  std::string default_explain_layer() const;

  // SHA-256 over the little-endian parameter bytes, "sha256:<hex>".
  std::string weight_checksum() const;

  PredictionRecord Forward(const ImageTensor& x) override;
  PredictionRecord Forward(const ImageTensor& x, std::optional<int> label);

  GradientResult Backward(const ImageTensor& x, const BackpropTarget& target,
                          const GradientRequest& request) override;
  GradientResult BackwardObjective(const ImageTensor& x, const Objective& objective,
                                   const GradientRequest& request);

  // Validated, resized, normalized CHW network input for `x`.
  Tensor<float> PrepareInput(const ImageTensor& x) const;

 private:
  const std::vector<Tensor<float>>& TraceFor(const ImageTensor& x);

  std::string architecture_id_;
  Network<float> network_;
  mutable std::string checksum_;

  // Memo of the last forward pass, keyed on pixels and normalization.
  std::vector<float> memo_pixels_;
  std::vector<float> memo_norm_;
  int memo_height_ = 0;
  int memo_width_ = 0;
  std::vector<Tensor<float>> memo_trace_;
};

// ---- Architectures ---------------------------------------------------------

inline constexpr char kBundledArchitectureId[] = "voice-cnn4";

// Four conv blocks (32-64-128-256 channels, 3x3, ReLU, 2x2 pooling after the
// first three), a 192-unit hidden layer and a linear classifier; ~1.18M
// parameters for 3x32x32 input.
std::vector<LayerSpec> BundledCnnLayers(int num_classes);
Model MakeBundledModel(int num_classes, std::uint64_t seed);

Model MakeModel(std::string architecture_id, Shape input, std::vector<LayerSpec> layers,
                std::uint64_t seed);

}  // namespace voice::net

#endif  // VOICE_NETCORE_MODEL_HPP_
