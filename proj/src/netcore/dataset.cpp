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

#include "voice/netcore/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "voice/common/error.hpp"
#include "voice/common/image_io.hpp"

namespace voice::net {
namespace fs = std::filesystem;

std::string_view DatasetFormatName(DatasetFormat format) {
  return format == DatasetFormat::kCifar10Binary ? "cifar10-bin" : "folder";
}

DatasetFormat ParseDatasetFormat(std::string_view name) {
  if (name == "cifar10-bin" || name == "cifar10") return DatasetFormat::kCifar10Binary;
  if (name == "folder") return DatasetFormat::kImageFolder;
  throw Error(ErrorCode::kInvalidArgument, "unknown dataset format: " + std::string(name));
}

Dataset LoadCifar10BatchFile(const fs::path& file, std::string_view tag) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + file.string());
  std::vector<unsigned char> record(kCifarRecordBytes);
  Dataset data;
  data.num_classes = 10;
  std::size_t index = 0;
  constexpr int kPlane = kCifarSide * kCifarSide;
  while (in.read(reinterpret_cast<char*>(record.data()),
                 static_cast<std::streamsize>(record.size()))) {
    const int label = record[0];
    if (label >= 10) {
      throw Error(ErrorCode::kIo, file.string() + ": label byte out of range");
    }
    ImageTensor image(kCifarSide, kCifarSide, 3);
    for (int p = 0; p < kPlane; ++p) {
      for (int c = 0; c < 3; ++c) {
        image.pixels[static_cast<std::size_t>(p) * 3 + c] =
            static_cast<float>(record[1 + c * kPlane + p]) / 255.0f;
      }
    }
    char id[32];
    std::snprintf(id, sizeof(id), "%06zu", index++);
    image.source_id = std::string(tag) + ":" + id;
    data.images.push_back(std::move(image));
    data.labels.push_back(label);
  }
  if (in.gcount() != 0) {
    throw Error(ErrorCode::kIo, file.string() + ": truncated CIFAR record");
  }
  return data;
}

void WriteCifar10BatchFile(const fs::path& file, const Dataset& data, std::size_t begin,
                           std::size_t end) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + file.string());
  constexpr int kPlane = kCifarSide * kCifarSide;
  std::vector<unsigned char> record(kCifarRecordBytes);
  for (std::size_t i = begin; i < end; ++i) {
    const ImageTensor& image = data.images[i];
    if (image.height != kCifarSide || image.width != kCifarSide || image.channels != 3) {
      throw Error(ErrorCode::kShapeMismatch, "CIFAR records must be 3x32x32");
    }
    record[0] = static_cast<unsigned char>(data.labels[i]);
    for (int p = 0; p < kPlane; ++p) {
      for (int c = 0; c < 3; ++c) {
        const float v = std::clamp(image.pixels[static_cast<std::size_t>(p) * 3 + c], 0.0f, 1.0f);
        record[1 + c * kPlane + p] = static_cast<unsigned char>(std::lround(v * 255.0f));
      }
    }
    out.write(reinterpret_cast<const char*>(record.data()),
              static_cast<std::streamsize>(record.size()));
  }
  if (!out) throw Error(ErrorCode::kIo, "short write to " + file.string());
}

Dataset LoadCifar10Binary(const fs::path& dir, Split split) {
  std::vector<fs::path> files;
  if (split == Split::kTest) {
    files.push_back(dir / "test_batch.bin");
  } else {
    for (int b = 1; b <= 5; ++b) {
      const fs::path f = dir / ("data_batch_" + std::to_string(b) + ".bin");
      if (fs::exists(f)) files.push_back(f);
    }
  }
  if (files.empty() || !fs::exists(files.front())) {
    throw Error(ErrorCode::kIo, "no CIFAR-10 batches for the requested split in " + dir.string());
  }
  Dataset all;
  all.num_classes = 10;
  const std::string split_tag = split == Split::kTest ? "test" : "train";
  std::size_t offset = 0;
  for (const fs::path& f : files) {
    Dataset part = LoadCifar10BatchFile(f, "cifar10:" + split_tag);
    for (std::size_t i = 0; i < part.size(); ++i) {
      char id[48];
      std::snprintf(id, sizeof(id), "cifar10:%s:%06zu", split_tag.c_str(), offset + i);
      part.images[i].source_id = id;
      all.images.push_back(std::move(part.images[i]));
      all.labels.push_back(part.labels[i]);
    }
    offset += part.size();
  }
  std::ifstream meta(dir / "batches.meta.txt");
  std::string line;
  while (std::getline(meta, line)) {
    if (!line.empty()) all.class_names.push_back(line);
  }
  if (all.class_names.size() != 10) {
    all.class_names.clear();
    for (int k = 0; k < 10; ++k) all.class_names.push_back(std::to_string(k));
  }
  return all;
}

Dataset LoadImageFolder(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(ErrorCode::kIo, "not a directory: " + dir.string());
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_directory()) class_dirs.push_back(entry.path());
  }
  std::sort(class_dirs.begin(), class_dirs.end());
  if (class_dirs.empty()) throw Error(ErrorCode::kIo, "no class folders in " + dir.string());
  Dataset data;
  data.num_classes = static_cast<int>(class_dirs.size());
  for (std::size_t k = 0; k < class_dirs.size(); ++k) {
    data.class_names.push_back(class_dirs[k].filename().string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(class_dirs[k])) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const fs::path& f : files) {
      const std::string id = class_dirs[k].filename().string() + "/" + f.filename().string();
      try {
        ImageTensor image = FromRaster(ReadImageFile(f), id);
        image.Validate();
        data.images.push_back(std::move(image));
        data.labels.push_back(static_cast<int>(k));
      } catch (const Error&) {
        data.skipped.push_back(id);
      }
    }
  }
  return data;
}

Dataset LoadDataset(const fs::path& path, std::optional<DatasetFormat> format, Split split) {
  if (!format.has_value()) {
    format = DatasetFormat::kImageFolder;
    if (fs::is_directory(path)) {
      for (const auto& entry : fs::directory_iterator(path)) {
        if (entry.path().extension() == ".bin") {
          format = DatasetFormat::kCifar10Binary;
          break;
        }
      }
    }
  }
  if (*format == DatasetFormat::kCifar10Binary) return LoadCifar10Binary(path, split);
  return LoadImageFolder(path);
}

}  // namespace voice::net
