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

#ifndef VOICE_NETCORE_WEIGHTS_HPP_
#define VOICE_NETCORE_WEIGHTS_HPP_

#include <filesystem>
#include <optional>

#include "voice/netcore/model.hpp"

namespace voice::net {

// Weight file layout (little-endian):
//   8 bytes   magic "VOICEWT1"
//   u64       length of the JSON header in bytes
//   JSON      {"architecture_id", "num_classes", "input_shape": [c,h,w],
//              "layers": [{"kind","name","in","out","kernel"}...],
//              "explainable_layers", "param_count", "checksum"}
//   f32[...]  parameters in layer order
// The checksum covers the parameter bytes only.
void SaveWeights(const Model& model, const std::filesystem::path& path);

// Throws kChecksumMismatch on a corrupt payload and kClassCountMismatch when
// `expected_classes` is given and differs from the file.
Model LoadWeights(const std::filesystem::path& path,
                  std::optional<int> expected_classes = std::nullopt);

}  // namespace voice::net

#endif  // VOICE_NETCORE_WEIGHTS_HPP_
