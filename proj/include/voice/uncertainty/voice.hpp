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

// Variance of induced contrastive explanations.
//
// For a prediction P, every class Q whose softmax probability exceeds p_t
// induces a contrastive map "why P rather than Q". The per-pixel variance of
// those maps, min-max normalized, is the uncertainty map of the explanation.

#ifndef VOICE_UNCERTAINTY_VOICE_HPP_
#define VOICE_UNCERTAINTY_VOICE_HPP_

#include <string>
#include <vector>

#include "voice/explainers/explainers.hpp"
#include "voice/explainers/explanation_map.hpp"
#include "voice/netcore/model.hpp"

namespace voice::uncertainty {

inline constexpr double kDefaultContrastThreshold = 1e-5;

// Suggested threshold for small label sets; 1e-5 is tuned for 1000 classes.
double SmallLabelSetThreshold(int num_classes);

struct ContrastSet {
  std::vector<int> classes;  // descending probability, ties by index
  double p_t = kDefaultContrastThreshold;

  int r() const { return static_cast<int>(classes.size()); }
};

struct ContrastStack {
  std::vector<net::Map2D> maps;
  std::vector<int> contrast_classes;  // parallel to maps

  int r() const { return static_cast<int>(maps.size()); }
  // Throws kShapeMismatch unless all maps share a shape and the lists agree.
  void Validate() const;
};

struct VoiceMap {
  net::Map2D values;
  int r_used = 0;
  explainers::Method method = explainers::Method::kGradCam;
  double p_t = kDefaultContrastThreshold;
  std::string parent_id;  // identifies the explanation this map qualifies
  explainers::NormalizationBounds bounds;
};

// Classes Q != P with probs[Q] > p_t (strict). Requires 0 < p_t < 1.
ContrastSet SelectContrastClasses(const net::PredictionRecord& record, double p_t);

// Runs `explainer` with the loss(P,Q) target.
explainers::ExplanationMap ContrastiveMap(net::GradientSource& source, const net::ImageTensor& x,
                                          int predicted, int contrast,
                                          const explainers::Explainer& explainer);

// Per-pixel population variance across the stack, min-max normalized.
// R <= 1 yields an all-zero map. Independent of the order of the stack.
VoiceMap VoiceMapFromStack(const ContrastStack& stack);

struct VoiceResult {
  net::PredictionRecord record;
  explainers::ExplanationMap explanation;  // logit(P) target
  VoiceMap voice;
  ContrastSet contrast_set;
  ContrastStack stack;
};

// Forward pass, base explanation, contrast induction and variance.
VoiceResult ComputeVoice(net::GradientSource& source, const net::ImageTensor& x,
                         const explainers::Explainer& explainer, double p_t);

nlohmann::json SidecarJson(const VoiceMap& map);
void SaveVoiceMap(const std::filesystem::path& stem, const VoiceMap& map);

}  // namespace voice::uncertainty

#endif  // VOICE_UNCERTAINTY_VOICE_HPP_
