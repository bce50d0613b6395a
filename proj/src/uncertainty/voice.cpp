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

#include "voice/uncertainty/voice.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voice/common/error.hpp"

namespace voice::uncertainty {

double SmallLabelSetThreshold(int num_classes) {
  if (num_classes < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two classes");
  return 1.0 / (static_cast<double>(num_classes) * num_classes);
}

void ContrastStack::Validate() const {
  if (maps.size() != contrast_classes.size()) {
    throw Error(ErrorCode::kShapeMismatch, "contrast stack: maps and classes differ in length");
  }
  for (const net::Map2D& m : maps) {
    if (!m.SameShape(maps.front()) ||
        m.values.size() != static_cast<std::size_t>(m.height) * m.width) {
      throw Error(ErrorCode::kShapeMismatch, "contrast stack: maps differ in shape");
    }
  }
}

ContrastSet SelectContrastClasses(const net::PredictionRecord& record, double p_t) {
  if (!(p_t > 0.0 && p_t < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "p_t must lie in (0, 1)");
  }
  ContrastSet set;
  set.p_t = p_t;
  for (int q = 0; q < record.num_classes(); ++q) {
    if (q != record.predicted && record.probs[q] > p_t) set.classes.push_back(q);
  }
  std::stable_sort(set.classes.begin(), set.classes.end(),
                   [&](int a, int b) { return record.probs[a] > record.probs[b]; });
  return set;
}

explainers::ExplanationMap ContrastiveMap(net::GradientSource& source, const net::ImageTensor& x,
                                          int predicted, int contrast,
                                          const explainers::Explainer& explainer) {
  return explainer.Explain(source, x, net::BackpropTarget::Loss(predicted, contrast));
}

VoiceMap VoiceMapFromStack(const ContrastStack& stack) {
  stack.Validate();
  VoiceMap out;
  out.r_used = stack.r();
  if (stack.maps.empty()) return out;
  const net::Map2D& first = stack.maps.front();
  out.values = net::Map2D(first.height, first.width);
  if (stack.r() <= 1) return out;

  // Values are sorted per pixel before the two-pass reduction, which makes
  // the result exactly invariant to the order of the stack.
  const double r = stack.r();
  std::vector<double> column(stack.maps.size());
  for (std::size_t p = 0; p < first.values.size(); ++p) {
    for (std::size_t k = 0; k < stack.maps.size(); ++k) column[k] = stack.maps[k].values[p];
    std::sort(column.begin(), column.end());
    const double mean = std::accumulate(column.begin(), column.end(), 0.0) / r;
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    out.values.values[p] = ss / r;
  }
  out.bounds = explainers::NormalizeInPlace(out.values);
  return out;
}

VoiceResult ComputeVoice(net::GradientSource& source, const net::ImageTensor& x,
                         const explainers::Explainer& explainer, double p_t) {
  VoiceResult result;
  result.record = source.Forward(x);
  const int p = result.record.predicted;
  result.explanation = explainer.Explain(source, x, net::BackpropTarget::Logit(p));
  result.contrast_set = SelectContrastClasses(result.record, p_t);
  for (int q : result.contrast_set.classes) {
    result.stack.maps.push_back(ContrastiveMap(source, x, p, q, explainer).values);
    result.stack.contrast_classes.push_back(q);
  }
  result.voice = VoiceMapFromStack(result.stack);
  if (result.stack.maps.empty()) {
    result.voice.values = net::Map2D(result.explanation.height(), result.explanation.width());
  }
  result.voice.method = explainer.method();
  result.voice.p_t = p_t;
  result.voice.parent_id = x.source_id + "/" + std::string(explainers::MethodName(
                                                    explainer.method())) +
                           "/" + result.explanation.target_desc;
  return result;
}

nlohmann::json SidecarJson(const VoiceMap& map) {
  return {{"kind", "voice"},
          {"method", explainers::MethodName(map.method)},
          {"p_t", map.p_t},
          {"r_used", map.r_used},
          {"parent", map.parent_id},
          {"normalization",
           {{"scheme", "min-max"},
            {"raw_min", map.bounds.raw_min},
            {"raw_max", map.bounds.raw_max},
            {"constant", map.bounds.constant}}}};
}

void SaveVoiceMap(const std::filesystem::path& stem, const VoiceMap& map) {
  explainers::WriteMapPng16(stem, map.values, SidecarJson(map));
}

}  // namespace voice::uncertainty
