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

#include "voice/harness/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "voice/common/error.hpp"
#include "voice/common/hash.hpp"
#include "voice/explainers/explanation_map.hpp"
#include "voice/perturb/perturb.hpp"

namespace voice::harness {
namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void Invalid(const std::string& message) {
  throw Error(ErrorCode::kInvalidConfig, message);
}

template <typename T>
T ParseNumber(std::string_view text, std::string_view key) {
  text = Trim(text);
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    Invalid("bad value for '" + std::string(key) + "': '" + std::string(text) + "'");
  }
  return value;
}

template <typename T>
std::vector<T> SplitNumbers(std::string_view text, std::string_view key) {
  std::vector<T> out;
  for (const std::string& item : ParseStringList(text)) out.push_back(ParseNumber<T>(item, key));
  return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view)>;

struct KeyDef {
  ConfigKey doc;
  Setter set;
};

const std::vector<KeyDef>& KeyDefs() {
  static const std::vector<KeyDef> defs = {
      {{"weights", "path", "weight file written by `voice train`"},
       [](ExperimentConfig& c, std::string_view v) { c.weights = v; }},
      {{"data", "path", "CIFAR-10 binary directory or class-per-folder image tree"},
       [](ExperimentConfig& c, std::string_view v) { c.data = v; }},
      {{"data_format", "string", "auto | cifar10-bin | folder"},
       [](ExperimentConfig& c, std::string_view v) { c.data_format = v; }},
      {{"split", "string", "train | test"},
       [](ExperimentConfig& c, std::string_view v) { c.split = v; }},
      {{"explainers", "list", "comma list of gradcam, gradcampp, guided_backprop, smoothgrad"},
       [](ExperimentConfig& c, std::string_view v) { c.explainers = ParseStringList(v); }},
      {{"layer", "string", "layer for CAM methods; empty selects the model default"},
       [](ExperimentConfig& c, std::string_view v) { c.layer = v; }},
      {{"pt", "float", "contrast-class probability threshold, 0 < pt < 1"},
       [](ExperimentConfig& c, std::string_view v) { c.p_t = ParseNumber<double>(v, "pt"); }},
      {{"iou_t", "float", "binarization threshold for IoU, 0 < t < 1"},
       [](ExperimentConfig& c, std::string_view v) {
         c.iou_t = ParseNumber<double>(v, "iou_t");
       }},
      {{"challenge", "string", "none | awgn | gaussian_blur | contrast | jpeg | ifgsm"},
       [](ExperimentConfig& c, std::string_view v) { c.challenge = v; }},
      {{"levels", "int list", "challenge levels, e.g. 0-5 or 0,2,4"},
       [](ExperimentConfig& c, std::string_view v) { c.levels = ParseIntList(v); }},
      {{"samples", "int", "images sampled per seed"},
       [](ExperimentConfig& c, std::string_view v) {
         c.samples = ParseNumber<int>(v, "samples");
       }},
      {{"seeds", "int list", "one run per seed (sampling and noise)"},
       [](ExperimentConfig& c, std::string_view v) {
         c.seeds = SplitNumbers<std::uint64_t>(v, "seeds");
       }},
      {{"out", "path", "output directory"},
       [](ExperimentConfig& c, std::string_view v) { c.out = v; }},
      {{"workers", "int", "worker threads; 0 uses every logical core"},
       [](ExperimentConfig& c, std::string_view v) {
         c.workers = ParseNumber<int>(v, "workers");
       }},
      {{"cache", "path", "map cache directory; empty uses <out>/cache, off disables"},
       [](ExperimentConfig& c, std::string_view v) { c.cache = v; }},
      {{"smoothgrad_samples", "int", "noisy samples per SmoothGrad map"},
       [](ExperimentConfig& c, std::string_view v) {
         c.smoothgrad_samples = ParseNumber<int>(v, "smoothgrad_samples");
       }},
      {{"smoothgrad_sigma", "float", "SmoothGrad noise std in [0,1] pixel units"},
       [](ExperimentConfig& c, std::string_view v) {
         if (Trim(v).empty()) {
           c.smoothgrad_sigma.reset();
         } else {
           c.smoothgrad_sigma = ParseNumber<double>(v, "smoothgrad_sigma");
         }
       }},
      {{"sweep_t", "float list", "thresholds for the IoU sweep"},
       [](ExperimentConfig& c, std::string_view v) {
         c.sweep_t = SplitNumbers<double>(v, "sweep_t");
       }},
      {{"overlays", "int", "number of images rendered as overlay panels"},
       [](ExperimentConfig& c, std::string_view v) {
         c.overlays = ParseNumber<int>(v, "overlays");
       }},
      {{"overlay_scale", "int", "nearest-neighbour upscaling of overlay panels"},
       [](ExperimentConfig& c, std::string_view v) {
         c.overlay_scale = ParseNumber<int>(v, "overlay_scale");
       }},
      {{"ifgsm_eps", "float", "I-FGSM L-inf budget per challenge level"},
       [](ExperimentConfig& c, std::string_view v) {
         c.ifgsm_eps = ParseNumber<double>(v, "ifgsm_eps");
       }},
      {{"ifgsm_steps", "int", "I-FGSM iterations"},
       [](ExperimentConfig& c, std::string_view v) {
         c.ifgsm_steps = ParseNumber<int>(v, "ifgsm_steps");
       }},
  };
  return defs;
}

}  // namespace

const std::vector<ConfigKey>& ConfigSchema() {
  static const std::vector<ConfigKey> schema = [] {
    std::vector<ConfigKey> keys;
    for (const KeyDef& d : KeyDefs()) keys.push_back(d.doc);
    return keys;
  }();
  return schema;
}

std::vector<std::string> ParseStringList(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? text.size() : comma;
    const std::string_view item = Trim(text.substr(start, end - start));
    if (!item.empty()) out.emplace_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<int> ParseIntList(std::string_view text) {
  std::vector<int> out;
  for (const std::string& item : ParseStringList(text)) {
    const std::size_t dash = item.find('-', 1);
    if (dash == std::string::npos) {
      out.push_back(ParseNumber<int>(item, "levels"));
      continue;
    }
    const int lo = ParseNumber<int>(std::string_view(item).substr(0, dash), "levels");
    const int hi = ParseNumber<int>(std::string_view(item).substr(dash + 1), "levels");
    if (hi < lo) Invalid("bad range '" + item + "'");
    for (int v = lo; v <= hi; ++v) out.push_back(v);
  }
  return out;
}

std::vector<double> ParseDoubleList(std::string_view text) {
  return SplitNumbers<double>(text, "list");
}

std::map<std::string, std::string> ParseConfigText(std::string_view text) {
  std::map<std::string, std::string> entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) {
      view = view.substr(0, hash);
    }
    view = Trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      Invalid("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(Trim(view.substr(0, eq)));
    if (key.empty()) Invalid("line " + std::to_string(line_no) + ": empty key");
    if (entries.count(key)) Invalid("duplicate key '" + key + "'");
    entries[key] = std::string(Trim(view.substr(eq + 1)));
  }
  return entries;
}

void ApplyConfigEntries(const std::map<std::string, std::string>& entries,
                        ExperimentConfig& config) {
  for (const auto& [raw_key, value] : entries) {
    std::string key = raw_key;
    std::replace(key.begin(), key.end(), '-', '_');
    const auto& defs = KeyDefs();
    const auto it = std::find_if(defs.begin(), defs.end(),
                                 [&](const KeyDef& d) { return d.doc.name == key; });
    if (it == defs.end()) Invalid("unknown config key '" + raw_key + "'");
    it->set(config, value);
  }
}

ExperimentConfig LoadConfig(const std::optional<std::filesystem::path>& file,
                            const std::map<std::string, std::string>& overrides) {
  ExperimentConfig config;
  if (file) {
    std::ifstream in(*file);
    if (!in) throw Error(ErrorCode::kIo, "cannot read config " + file->string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    ApplyConfigEntries(ParseConfigText(buffer.str()), config);
  }
  ApplyConfigEntries(overrides, config);
  return config;
}

nlohmann::json ExperimentConfig::ToJson() const {
  nlohmann::json j = {
      {"weights", weights},
      {"data", data},
      {"data_format", data_format},
      {"split", split},
      {"explainers", explainers},
      {"layer", layer},
      {"pt", p_t},
      {"iou_t", iou_t},
      {"challenge", challenge},
      {"levels", levels},
      {"samples", samples},
      {"seeds", seeds},
      {"smoothgrad_samples", smoothgrad_samples},
      {"smoothgrad_sigma", smoothgrad_sigma ? nlohmann::json(*smoothgrad_sigma) : nullptr},
      {"sweep_t", sweep_t},
      {"ifgsm_eps", ifgsm_eps},
      {"ifgsm_steps", ifgsm_steps},
  };
  return j;
}

std::string ExperimentConfig::Hash() const { return "sha256:" + Sha256Hex(ToJson().dump()); }

void ExperimentConfig::Validate(bool need_weights, bool need_data) const {
  namespace fs = std::filesystem;
  if (need_weights && (weights.empty() || !fs::exists(weights))) {
    Invalid("weights not found: '" + weights + "'");
  }
  if (need_data && (data.empty() || !fs::exists(data))) {
    Invalid("data not found: '" + data + "'");
  }
  if (data_format != "auto" && data_format != "cifar10-bin" && data_format != "folder") {
    Invalid("data_format must be auto, cifar10-bin or folder");
  }
  if (split != "train" && split != "test") Invalid("split must be train or test");
  if (explainers.empty()) Invalid("explainers must not be empty");
  for (const std::string& e : explainers) {
    try {
      explainers::ParseMethod(e);
    } catch (const Error&) {
      Invalid("unknown explainer '" + e + "'");
    }
  }
  if (!(p_t > 0.0 && p_t < 1.0)) Invalid("pt must lie in (0, 1)");
  if (!(iou_t > 0.0 && iou_t < 1.0)) Invalid("iou_t must lie in (0, 1)");
  if (levels.empty()) Invalid("levels must not be empty");
  if (challenge != "none") {
    perturb::ChallengeKind kind;
    try {
      kind = perturb::ParseChallengeKind(challenge);
    } catch (const Error&) {
      Invalid("unknown challenge '" + challenge + "'");
    }
    for (int l : levels) {
      if (l < 0 || l > perturb::MaxLevel(kind)) {
        Invalid("level " + std::to_string(l) + " out of range for " + challenge);
      }
    }
  }
  for (std::size_t i = 1; i < levels.size(); ++i) {
    if (levels[i] <= levels[i - 1]) Invalid("levels must be strictly increasing");
  }
  if (samples < 1) Invalid("samples must be >= 1");
  if (seeds.empty()) Invalid("seeds must not be empty");
  if (workers < 0) Invalid("workers must be >= 0");
  if (smoothgrad_samples < 1) Invalid("smoothgrad_samples must be >= 1");
  if (smoothgrad_sigma && *smoothgrad_sigma < 0.0) Invalid("smoothgrad_sigma must be >= 0");
  for (double t : sweep_t) {
    if (!(t > 0.0 && t < 1.0)) Invalid("sweep_t values must lie in (0, 1)");
  }
  if (overlays < 0) Invalid("overlays must be >= 0");
  if (overlay_scale < 1) Invalid("overlay_scale must be >= 1");
  if (!(ifgsm_eps >= 0.0)) Invalid("ifgsm_eps must be >= 0");
  if (ifgsm_steps < 1) Invalid("ifgsm_steps must be >= 1");
}

std::filesystem::path ExperimentConfig::CacheDir() const {
  if (cache == "off") return {};
  if (cache.empty()) return std::filesystem::path(out) / "cache";
  return cache;
}

int ExperimentConfig::ResolvedWorkers() const {
  if (workers > 0) return workers;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace voice::harness
