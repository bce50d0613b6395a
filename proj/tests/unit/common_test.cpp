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

#include <set>

#include <gtest/gtest.h>

#include "testing/fixtures.hpp"
#include "voice/common/error.hpp"
#include "voice/common/hash.hpp"
#include "voice/common/image_io.hpp"
#include "voice/common/random.hpp"

namespace voice {
namespace {

TEST(HashTest, KnownSha256Vectors) {
  EXPECT_EQ(Sha256Hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(Sha256Hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(HashTest, IncrementalMatchesOneShot) {
  Sha256 h;
  h.Update("ab").Update("c");
  EXPECT_EQ(h.HexDigest(), Sha256Hex("abc"));
}

TEST(RandomTest, SeededStreamsAreReproducible) {
  Rng a(42);
  Rng b(42);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.NextU64(), b.NextU64());
  EXPECT_NE(MixSeed(1, 2), MixSeed(2, 1));
  EXPECT_EQ(StableHash("cifar10:test:000001"), StableHash("cifar10:test:000001"));
  EXPECT_NE(StableHash("a"), StableHash("b"));
}

TEST(RandomTest, BelowStaysInRangeAndCoversIt) {
  Rng rng(7);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = rng.Below(5);
    ASSERT_LT(v, 5u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 5u);
}

TEST(RandomTest, NormalHasUnitMoments) {
  Rng rng(11);
  double sum = 0.0;
  double sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double v = rng.Normal();
    sum += v;
    sq += v * v;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.02);
}

TEST(ImageIoTest, Png16RoundTripIsExact) {
  const auto dir = testing::TempDir("png16");
  std::vector<std::uint16_t> samples = {0, 1, 65535, 12345, 40000, 7};
  WritePngGray16(dir / "m.png", 3, 2, samples);
  int w = 0;
  int h = 0;
  EXPECT_EQ(ReadPngGray16(dir / "m.png", &w, &h), samples);
  EXPECT_EQ(w, 3);
  EXPECT_EQ(h, 2);
}

TEST(ImageIoTest, Png8RoundTripThroughSniffingReader) {
  const auto dir = testing::TempDir("png8");
  Raster8 r;
  r.width = 4;
  r.height = 2;
  r.channels = 3;
  for (int i = 0; i < 24; ++i) r.data.push_back(static_cast<std::uint8_t>(i * 10));
  WritePng8(dir / "a.png", r);
  const Raster8 back = ReadImageFile(dir / "a.png");
  EXPECT_EQ(back.data, r.data);
}

TEST(ImageIoTest, JpegRoundTripKeepsGeometry) {
  Raster8 r;
  r.width = 16;
  r.height = 8;
  r.channels = 3;
  for (int i = 0; i < 16 * 8 * 3; ++i) r.data.push_back(static_cast<std::uint8_t>(i % 200));
  const auto bytes = EncodeJpeg(r, 90);
  ASSERT_GT(bytes.size(), 2u);
  EXPECT_EQ(bytes[0], 0xFF);
  const Raster8 back = DecodeJpeg(bytes);
  EXPECT_EQ(back.width, 16);
  EXPECT_EQ(back.height, 8);
  EXPECT_EQ(back.channels, 3);
}

TEST(ImageIoTest, CorruptInputsRaiseIoErrors) {
  const std::vector<std::uint8_t> junk = {0xFF, 0xD8, 0x00, 0x01};
  try {
    DecodeJpeg(junk);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
  EXPECT_THROW(ReadImageFile("/nonexistent/file.png"), Error);
}

}  // namespace
}  // namespace voice
