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

#ifndef VOICE_NETCORE_SYNTHETIC_HPP_
#define VOICE_NETCORE_SYNTHETIC_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string_view>

#include "voice/netcore/dataset.hpp"

namespace voice::net {

// Procedural 10-class, 32x32 RGB object dataset used when CIFAR-10 itself is
// not available. Each image holds one main object of its class on a textured
// background, optionally with a smaller distractor of another class, blur,
// sensor noise and low contrast. Several class pairs are deliberately
// confusable (disk/ring/crescent, square/frame, plus/x, stripe orientations).
inline constexpr std::array<std::string_view, 10> kSyntheticClassNames = {
    "disk", "ring", "square", "frame", "triangle",
    "plus", "xcross", "hstripes", "vstripes", "crescent"};

// Image `index` depends only on (seed, index).
ImageTensor GenerateSyntheticImage(std::uint64_t seed, std::uint64_t index, int label);

// `count` images with labels cycling through a seeded permutation.
Dataset GenerateSyntheticDataset(int count, std::uint64_t seed, std::string_view tag);

struct SyntheticSpec {
  int train_count = 20000;
  int test_count = 2000;
  std::uint64_t seed = 20240101;
};

// Writes data_batch_{1..5}.bin, test_batch.bin and batches.meta.txt in the
// CIFAR-10 binary layout.
void WriteSyntheticCifar(const std::filesystem::path& dir, const SyntheticSpec& spec);

}  // namespace voice::net

#endif  // VOICE_NETCORE_SYNTHETIC_HPP_
