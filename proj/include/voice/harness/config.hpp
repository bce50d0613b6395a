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

#ifndef VOICE_HARNESS_CONFIG_HPP_
#define VOICE_HARNESS_CONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace voice::harness {

inline constexpr char kToolVersion[] = "voice 0.1.0";

// Experiment configuration. Files are flat `key = value` lines; `#` starts a
// comment. Command-line flags override file values. Unknown keys are errors.
struct ExperimentConfig {
  std::string weights;
  std::string data;
  std::string data_format = "auto";  // auto | cifar10-bin | folder
  std::string split = "test";        // train | test (cifar10-bin only)
  std::vector<std::string> explainers = {"gradcam", "gradcampp"};
  std::string layer;                 // empty: the model's default layer
  double p_t = 1e-5;
  double iou_t = 0.1;
  std::string challenge = "none";    // none | awgn | gaussian_blur | contrast | jpeg | ifgsm
  std::vector<int> levels = {0};
  int samples = 500;
  std::vector<std::uint64_t> seeds = {0};
  std::string out = "voice_run";
  int workers = 0;                   // 0: one per logical core
  std::string cache;                 // empty: <out>/cache; "off" disables
  int smoothgrad_samples = 25;
  std::optional<double> smoothgrad_sigma;  // unset: 0.1 * pixel range
  std::vector<double> sweep_t = {0.1, 0.3, 0.4, 0.5, 0.6, 0.7};
  int overlays = 0;                  // overlay panels written per run
  int overlay_scale = 4;
  double ifgsm_eps = 2.0 / 255.0;    // per challenge level
  int ifgsm_steps = 10;

  // Fields that influence results, as a JSON object with sorted keys.
  nlohmann::json ToJson() const;
  // SHA-256 of the canonical JSON; independent of key order in the file.
  std::string Hash() const;
  // Throws kInvalidConfig on out-of-range values or missing paths.
  void Validate(bool need_weights, bool need_data) const;
  std::filesystem::path CacheDir() const;
  int ResolvedWorkers() const;
};

struct ConfigKey {
  std::string name;
  std::string type;
  std::string help;
};

// Every accepted key with its type and meaning.
const std::vector<ConfigKey>& ConfigSchema();

// Parses `key = value` text into raw entries (no validation of keys).
std::map<std::string, std::string> ParseConfigText(std::string_view text);

// Applies raw entries on top of `config`. Throws kInvalidConfig for unknown
// keys or unparsable values.
void ApplyConfigEntries(const std::map<std::string, std::string>& entries,
                        ExperimentConfig& config);

// File (optional) then overrides.
ExperimentConfig LoadConfig(const std::optional<std::filesystem::path>& file,
                            const std::map<std::string, std::string>& overrides);

// "0-5", "0,2,4" or a mix such as "0,3-5".
std::vector<int> ParseIntList(std::string_view text);
std::vector<double> ParseDoubleList(std::string_view text);
std::vector<std::string> ParseStringList(std::string_view text);

}  // namespace voice::harness

#endif  // VOICE_HARNESS_CONFIG_HPP_
