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

#ifndef VOICE_COMMON_IMAGE_IO_HPP_
#define VOICE_COMMON_IMAGE_IO_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace voice {

// Interleaved 8-bit raster, row-major, `channels` in {1, 3}.
struct Raster8 {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> data;
};

// Decodes PNG or JPEG (sniffed by magic bytes) to RGB.
Raster8 ReadImageFile(const std::filesystem::path& path);

void WritePng8(const std::filesystem::path& path, const Raster8& image);

// Single-channel 16-bit PNG; `samples` is row-major, width * height long.
void WritePngGray16(const std::filesystem::path& path, int width, int height,
                    std::span<const std::uint16_t> samples);
std::vector<std::uint16_t> ReadPngGray16(const std::filesystem::path& path,
                                         int* width, int* height);

// In-memory JPEG codec; quality in [1, 100].
std::vector<std::uint8_t> EncodeJpeg(const Raster8& image, int quality);
Raster8 DecodeJpeg(std::span<const std::uint8_t> bytes);

}  // namespace voice

#endif  // VOICE_COMMON_IMAGE_IO_HPP_
