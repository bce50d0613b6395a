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

#include "voice/harness/cache.hpp"

#include <fstream>
#include <iterator>
#include <thread>

#include "voice/common/error.hpp"
#include "voice/common/hash.hpp"

namespace voice::harness {
namespace {

using nlohmann::json;

constexpr int kCacheFormat = 1;

json MapToJson(const net::Map2D& m) {
  return {{"h", m.height}, {"w", m.width}, {"v", m.values}};
}

net::Map2D MapFromJson(const json& j) {
  net::Map2D m(j.at("h").get<int>(), j.at("w").get<int>());
  m.values = j.at("v").get<std::vector<double>>();
  if (m.values.size() != static_cast<std::size_t>(m.height) * m.width) {
    throw Error(ErrorCode::kShapeMismatch, "cache entry: map size mismatch");
  }
  return m;
}

json BoundsToJson(const explainers::NormalizationBounds& b) {
  return {{"min", b.raw_min}, {"max", b.raw_max}, {"constant", b.constant}};
}

explainers::NormalizationBounds BoundsFromJson(const json& j) {
  return {j.at("min").get<double>(), j.at("max").get<double>(), j.at("constant").get<bool>()};
}

}  // namespace

std::string CacheKey::Digest() const {
  const json j = {{"weights", weight_checksum}, {"source", source_id}, {"challenge", challenge},
                  {"method", method},           {"layer", layer},      {"pt", p_t},
                  {"seed", seed}};
  return Sha256Hex(j.dump());
}

CacheEntry EntryFromResult(const uncertainty::VoiceResult& result) {
  CacheEntry e;
  e.record = result.record;
  e.record.label.reset();
  e.record.correct.reset();
  e.explanation = result.explanation;
  e.voice = result.voice;
  e.contrast_classes = result.contrast_set.classes;
  return e;
}

MapCache::MapCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  if (enabled()) std::filesystem::create_directories(dir_);
}

std::filesystem::path MapCache::PathFor(const std::string& digest) const {
  return dir_ / digest.substr(0, 2) / (digest + ".cbor");
}

std::optional<CacheEntry> MapCache::Load(const std::string& digest) const {
  if (!enabled()) return std::nullopt;
  std::ifstream in(PathFor(digest), std::ios::binary);
  if (!in) return std::nullopt;
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  const json j = json::from_cbor(bytes, true, false);
  if (j.is_discarded() || j.value("format", 0) != kCacheFormat) return std::nullopt;

  CacheEntry e;
  e.record = net::MakePrediction(j.at("logits").get<std::vector<double>>());
  const json& ex = j.at("explanation");
  e.explanation.values = MapFromJson(ex.at("map"));
  e.explanation.method = explainers::ParseMethod(ex.at("method").get<std::string>());
  e.explanation.target_desc = ex.at("target").get<std::string>();
  e.explanation.layer_name = ex.at("layer").get<std::string>();
  e.explanation.bounds = BoundsFromJson(ex.at("bounds"));
  e.explanation.degenerate = ex.at("degenerate").get<bool>();
  const json& vo = j.at("voice");
  e.voice.values = MapFromJson(vo.at("map"));
  e.voice.r_used = vo.at("r_used").get<int>();
  e.voice.method = e.explanation.method;
  e.voice.p_t = vo.at("pt").get<double>();
  e.voice.parent_id = vo.at("parent").get<std::string>();
  e.voice.bounds = BoundsFromJson(vo.at("bounds"));
  e.contrast_classes = j.at("contrast").get<std::vector<int>>();
  return e;
}

void MapCache::Store(const std::string& digest, const CacheEntry& e) const {
  if (!enabled()) return;
  const json j = {
      {"format", kCacheFormat},
      {"logits", e.record.logits},
      {"contrast", e.contrast_classes},
      {"explanation",
       {{"map", MapToJson(e.explanation.values)},
        {"method", explainers::MethodName(e.explanation.method)},
        {"target", e.explanation.target_desc},
        {"layer", e.explanation.layer_name},
        {"bounds", BoundsToJson(e.explanation.bounds)},
        {"degenerate", e.explanation.degenerate}}},
      {"voice",
       {{"map", MapToJson(e.voice.values)},
        {"r_used", e.voice.r_used},
        {"pt", e.voice.p_t},
        {"parent", e.voice.parent_id},
        {"bounds", BoundsToJson(e.voice.bounds)}}},
  };
  const std::vector<std::uint8_t> bytes = json::to_cbor(j);
  const std::filesystem::path path = PathFor(digest);
  std::filesystem::create_directories(path.parent_path());
  // Write-then-rename keeps readers from seeing partial files.
  std::filesystem::path tmp = path;
  tmp += ".tmp" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIo, "cannot write cache file " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace voice::harness
