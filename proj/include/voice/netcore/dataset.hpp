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

#ifndef VOICE_NETCORE_DATASET_HPP_
#define VOICE_NETCORE_DATASET_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "voice/netcore/image.hpp"

namespace voice::net {

struct Dataset {
  std::vector<ImageTensor> images;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::string> class_names;
  // Files that could not be decoded (folder datasets only).
  std::vector<std::string> skipped;

  std::size_t size() const { return images.size(); }
};

enum class DatasetFormat { kCifar10Binary, kImageFolder };
enum class Split { kTrain, kTest };

std::string_view DatasetFormatName(DatasetFormat format);
DatasetFormat ParseDatasetFormat(std::string_view name);

inline constexpr int kCifarSide = 32;
inline constexpr std::size_t kCifarRecordBytes = 1 + 3 * kCifarSide * kCifarSide;

// One CIFAR-10 binary batch: records of <1 label byte><1024 R><1024 G><1024 B>.
Dataset LoadCifar10BatchFile(const std::filesystem::path& file, std::string_view tag);
void WriteCifar10BatchFile(const std::filesystem::path& file, const Dataset& data,
                           std::size_t begin, std::size_t end);

// `dir` holds data_batch_{1..5}.bin and test_batch.bin (the
// cifar-10-batches-bin layout); class names come from batches.meta.txt.
Dataset LoadCifar10Binary(const std::filesystem::path& dir, Split split);

// One sub-directory per class (sorted by name), PNG/JPEG files inside.
// Undecodable files are recorded in `skipped`.
Dataset LoadImageFolder(const std::filesystem::path& dir);

// Detects the format when not given: a directory containing *.bin batches is
// CIFAR-10 binary, anything else is an image folder.
Dataset LoadDataset(const std::filesystem::path& path, std::optional<DatasetFormat> format,
                    Split split);

}  // namespace voice::net

#endif  // VOICE_NETCORE_DATASET_HPP_
