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

#ifndef VOICE_HARNESS_CACHE_HPP_
#define VOICE_HARNESS_CACHE_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "voice/explainers/explanation_map.hpp"
#include "voice/netcore/model.hpp"
#include "voice/uncertainty/voice.hpp"

namespace voice::harness {

// Everything that determines an (explanation, VOICE) pair.
struct CacheKey {
  std::string weight_checksum;
  std::string source_id;
  std::string challenge;   // perturb::ChallengeSpec::Key() or "clean"
  std::string method;      // Explainer::ConfigKey(), includes the layer
  std::string layer;
  double p_t = 0.0;
  std::uint64_t seed = 0;

  // SHA-256 over a canonical rendering of the fields.
  std::string Digest() const;
};

struct CacheEntry {
  net::PredictionRecord record;  // label not stored
  explainers::ExplanationMap explanation;
  uncertainty::VoiceMap voice;
  std::vector<int> contrast_classes;
};

CacheEntry EntryFromResult(const uncertainty::VoiceResult& result);

// Directory of CBOR blobs holding the maps as exact float64 values, so a
// cached run reproduces metrics bit for bit. A default-constructed cache is
// disabled: lookups miss and stores are dropped.
class MapCache {
 public:
  MapCache() = default;
  explicit MapCache(std::filesystem::path dir);

  bool enabled() const { return !dir_.empty(); }
  const std::filesystem::path& dir() const { return dir_; }

  std::optional<CacheEntry> Load(const std::string& digest) const;
  // Safe to call concurrently for distinct digests.
  void Store(const std::string& digest, const CacheEntry& entry) const;

 private:
  std::filesystem::path PathFor(const std::string& digest) const;

  std::filesystem::path dir_;
};

}  // namespace voice::harness

#endif  // VOICE_HARNESS_CACHE_HPP_
