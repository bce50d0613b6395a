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

#include "voice/netcore/weights.hpp"

#include <cstring>
#include <fstream>

#include "json.hpp"
#include "voice/common/error.hpp"
#include "voice/common/hash.hpp"

namespace voice::net {
namespace {

constexpr char kMagic[8] = {'V', 'O', 'I', 'C', 'E', 'W', 'T', '1'};

}  // namespace

void SaveWeights(const Model& model, const std::filesystem::path& path) {
  const Network<float>& net = model.network();
  nlohmann::json header;
  header["architecture_id"] = model.architecture_id();
  header["num_classes"] = model.num_classes();
  const Shape& in = net.input_shape();
  header["input_shape"] = {in.channels, in.height, in.width};
  nlohmann::json layers = nlohmann::json::array();
  for (const LayerSpec& spec : net.layers()) {
    layers.push_back({{"kind", LayerKindName(spec.kind)},
                      {"name", spec.name},
                      {"in", spec.in},
                      {"out", spec.out},
                      {"kernel", spec.kernel}});
  }
  header["layers"] = layers;
  header["explainable_layers"] = model.explainable_layers();
  header["param_count"] = net.params().size();
  header["checksum"] = model.weight_checksum();
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const auto bytes = std::as_bytes(net.params());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "short write to " + path.string());
}

Model LoadWeights(const std::filesystem::path& path, std::optional<int> expected_classes) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open weights " + path.string());
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0 || len > (1u << 24)) {
    throw Error(ErrorCode::kChecksumMismatch, "not a weight file: " + path.string());
  }
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kChecksumMismatch, std::string("corrupt weight header: ") + e.what());
  }

  std::vector<LayerSpec> layers;
  Shape shape;
  std::string arch;
  std::string checksum;
  int num_classes = 0;
  std::size_t param_count = 0;
  try {
    arch = header.at("architecture_id").get<std::string>();
    num_classes = header.at("num_classes").get<int>();
    const auto& s = header.at("input_shape");
    shape = {s.at(0).get<int>(), s.at(1).get<int>(), s.at(2).get<int>()};
    for (const auto& l : header.at("layers")) {
      layers.push_back({ParseLayerKind(l.at("kind").get<std::string>()),
                        l.at("name").get<std::string>(), l.at("in").get<int>(),
                        l.at("out").get<int>(), l.at("kernel").get<int>()});
    }
    param_count = header.at("param_count").get<std::size_t>();
    checksum = header.at("checksum").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kChecksumMismatch, std::string("corrupt weight header: ") + e.what());
  }

  Network<float> net(shape, std::move(layers));
  if (net.params().size() != param_count || net.num_outputs() != num_classes) {
    throw Error(ErrorCode::kChecksumMismatch, "weight header is inconsistent");
  }
  if (expected_classes.has_value() && *expected_classes != num_classes) {
    throw Error(ErrorCode::kClassCountMismatch,
                "weights have " + std::to_string(num_classes) + " classes, expected " +
                    std::to_string(*expected_classes));
  }
  auto params = net.params();
  in.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(params.size_bytes()));
  if (!in || in.peek() != std::char_traits<char>::eof()) {
    throw Error(ErrorCode::kChecksumMismatch, "weight payload has the wrong length");
  }
  Model model(arch, std::move(net));
  if (model.weight_checksum() != checksum) {
    throw Error(ErrorCode::kChecksumMismatch, "weight checksum mismatch in " + path.string());
  }
  return model;
}

}  // namespace voice::net
