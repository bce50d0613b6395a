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

#include "voice/netcore/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "voice/common/error.hpp"
#include "voice/common/random.hpp"

namespace voice::net {
namespace {

constexpr int kSide = kCifarSide;
constexpr double kPi = std::numbers::pi;

struct Color {
  double r, g, b;
};

Color RandomColor(Rng& rng) { return {rng.Uniform(), rng.Uniform(), rng.Uniform()}; }

double Luma(const Color& c) { return 0.299 * c.r + 0.587 * c.g + 0.114 * c.b; }

// Signed "inside-ness" of object-local point (u, v) for a class, > 0 inside.
// Shapes live roughly in the unit square [-1, 1]^2.
double ShapeField(int cls, double u, double v) {
  const double r = std::hypot(u, v);
  const double box = std::max(std::abs(u), std::abs(v));
  switch (cls) {
    case 0:  // disk
      return 1.0 - r;
    case 1:  // ring
      return std::min(1.0 - r, r - 0.55);
    case 2:  // square
      return 0.85 - box;
    case 3:  // frame
      return std::min(0.85 - box, box - 0.5);
    case 4: {  // triangle, apex at v = -0.9, base at v = 0.75 (v grows downward)
      const double sides = (0.576 * (v + 0.9) - std::abs(u)) / 1.154;
      return std::min(0.75 - v, sides);
    }
    case 5: {  // plus
      const double bar_h = std::min(0.3 - std::abs(v), 1.0 - std::abs(u));
      const double bar_v = std::min(0.3 - std::abs(u), 1.0 - std::abs(v));
      return std::max(bar_h, bar_v);
    }
    case 6: {  // diagonal cross
      const double a = (u + v) / std::numbers::sqrt2;
      const double b = (u - v) / std::numbers::sqrt2;
      const double d1 = std::min(0.28 - std::abs(a), 1.05 - std::abs(b));
      const double d2 = std::min(0.28 - std::abs(b), 1.05 - std::abs(a));
      return std::max(d1, d2);
    }
    case 7: {  // horizontal stripes in a square patch
      const double stripes = 0.35 * std::cos(v * 2.5 * kPi);
      return std::min(0.9 - box, stripes);
    }
    case 8: {  // vertical stripes
      const double stripes = 0.35 * std::cos(u * 2.5 * kPi);
      return std::min(0.9 - box, stripes);
    }
    case 9: {  // crescent
      const double inner = std::hypot(u - 0.45, v + 0.1);
      return std::min(1.0 - r, inner - 0.75);
    }
  }
  return -1.0;
}

struct ObjectPlacement {
  int cls;
  double cx, cy;    // centre in pixels
  double scale;     // half-size in pixels
  double angle;     // radians
  Color color;
};

// Paints an anti-aliased object onto an HWC buffer of doubles.
void PaintObject(const ObjectPlacement& obj, std::vector<double>& canvas) {
  const double ca = std::cos(obj.angle);
  const double sa = std::sin(obj.angle);
  const double edge = 1.2 / obj.scale;  // ~1 pixel soft edge in local units
  for (int y = 0; y < kSide; ++y) {
    for (int x = 0; x < kSide; ++x) {
      const double dx = (x + 0.5 - obj.cx) / obj.scale;
      const double dy = (y + 0.5 - obj.cy) / obj.scale;
      const double u = ca * dx + sa * dy;
      const double v = -sa * dx + ca * dy;
      const double f = ShapeField(obj.cls, u, v);
      const double cover = std::clamp(0.5 + f / edge, 0.0, 1.0);
      if (cover <= 0.0) continue;
      double* px = &canvas[(static_cast<std::size_t>(y) * kSide + x) * 3];
      px[0] = (1 - cover) * px[0] + cover * obj.color.r;
      px[1] = (1 - cover) * px[1] + cover * obj.color.g;
      px[2] = (1 - cover) * px[2] + cover * obj.color.b;
    }
  }
}

void BoxBlur3(std::vector<double>& canvas, double strength) {
  std::vector<double> src = canvas;
  for (int y = 0; y < kSide; ++y) {
    for (int x = 0; x < kSide; ++x) {
      for (int c = 0; c < 3; ++c) {
        double acc = 0.0;
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = std::clamp(y + dy, 0, kSide - 1);
            const int xx = std::clamp(x + dx, 0, kSide - 1);
            acc += src[(static_cast<std::size_t>(yy) * kSide + xx) * 3 + c];
            ++n;
          }
        }
        double& dst = canvas[(static_cast<std::size_t>(y) * kSide + x) * 3 + c];
        dst = (1 - strength) * dst + strength * acc / n;
      }
    }
  }
}

}  // namespace

ImageTensor GenerateSyntheticImage(std::uint64_t seed, std::uint64_t index, int label) {
  if (label < 0 || label >= 10) throw Error(ErrorCode::kInvalidArgument, "label out of range");
  Rng rng(MixSeed(seed, index, 0x5EED));
  std::vector<double> canvas(static_cast<std::size_t>(kSide) * kSide * 3);

  // Background: two-colour linear gradient plus a few soft blobs.
  const Color c0 = RandomColor(rng);
  const Color c1 = RandomColor(rng);
  const double theta = rng.Uniform(0, 2 * kPi);
  for (int y = 0; y < kSide; ++y) {
    for (int x = 0; x < kSide; ++x) {
      const double t = 0.5 + 0.5 * ((x - 15.5) * std::cos(theta) + (y - 15.5) * std::sin(theta)) / 22.0;
      double* px = &canvas[(static_cast<std::size_t>(y) * kSide + x) * 3];
      px[0] = (1 - t) * c0.r + t * c1.r;
      px[1] = (1 - t) * c0.g + t * c1.g;
      px[2] = (1 - t) * c0.b + t * c1.b;
    }
  }
  const int blobs = static_cast<int>(rng.Below(4));
  for (int b = 0; b < blobs; ++b) {
    const Color bc = RandomColor(rng);
    const double bx = rng.Uniform(0, kSide);
    const double by = rng.Uniform(0, kSide);
    const double br = rng.Uniform(3, 9);
    const double alpha = rng.Uniform(0.15, 0.5);
    for (int y = 0; y < kSide; ++y) {
      for (int x = 0; x < kSide; ++x) {
        const double d = std::hypot(x + 0.5 - bx, y + 0.5 - by) / br;
        const double w = alpha * std::exp(-d * d);
        double* px = &canvas[(static_cast<std::size_t>(y) * kSide + x) * 3];
        px[0] = (1 - w) * px[0] + w * bc.r;
        px[1] = (1 - w) * px[1] + w * bc.g;
        px[2] = (1 - w) * px[2] + w * bc.b;
      }
    }
  }
  const Color bg_mean = {(c0.r + c1.r) / 2, (c0.g + c1.g) / 2, (c0.b + c1.b) / 2};

  // Object colour at a random luminance contrast from the background.
  auto object_color = [&](double min_contrast, double max_contrast) {
    const double target = rng.Uniform(min_contrast, max_contrast);
    Color best = RandomColor(rng);
    for (int attempt = 0; attempt < 16; ++attempt) {
      const Color c = RandomColor(rng);
      if (std::abs(std::abs(Luma(c) - Luma(bg_mean)) - target) <
          std::abs(std::abs(Luma(best) - Luma(bg_mean)) - target)) {
        best = c;
      }
    }
    return best;
  };

  ObjectPlacement main_obj;
  main_obj.cls = label;
  main_obj.scale = rng.Uniform(6.0, 11.0);
  const double margin = main_obj.scale * 0.6;
  main_obj.cx = rng.Uniform(margin, kSide - margin);
  main_obj.cy = rng.Uniform(margin, kSide - margin);
  // Orientation classes keep a bounded tilt so they stay distinguishable.
  const bool oriented = label == 5 || label == 6 || label == 7 || label == 8;
  main_obj.angle = oriented ? rng.Uniform(-0.35, 0.35) : rng.Uniform(0, 2 * kPi);
  main_obj.color = object_color(0.05, 0.55);

  const bool distractor = rng.Uniform() < 0.55;
  if (distractor) {
    ObjectPlacement other;
    other.cls = static_cast<int>((label + 1 + rng.Below(9)) % 10);
    other.scale = main_obj.scale * rng.Uniform(0.45, 0.8);
    other.cx = rng.Uniform(other.scale * 0.5, kSide - other.scale * 0.5);
    other.cy = rng.Uniform(other.scale * 0.5, kSide - other.scale * 0.5);
    const bool o_oriented = other.cls >= 5 && other.cls <= 8;
    other.angle = o_oriented ? rng.Uniform(-0.35, 0.35) : rng.Uniform(0, 2 * kPi);
    other.color = object_color(0.05, 0.5);
    // Paint the distractor first so the main object occludes it.
    PaintObject(other, canvas);
  }
  PaintObject(main_obj, canvas);

  if (rng.Uniform() < 0.4) BoxBlur3(canvas, rng.Uniform(0.3, 1.0));
  const double noise = rng.Uniform(0.0, 0.09);
  for (double& v : canvas) v = std::clamp(v + noise * rng.Normal(), 0.0, 1.0);

  ImageTensor image(kSide, kSide, 3);
  for (std::size_t i = 0; i < canvas.size(); ++i) {
    // Quantize to 8 bits so in-memory and CIFAR-serialized copies agree.
    image.pixels[i] = static_cast<float>(std::lround(canvas[i] * 255.0)) / 255.0f;
  }
  return image;
}

Dataset GenerateSyntheticDataset(int count, std::uint64_t seed, std::string_view tag) {
  Dataset data;
  data.num_classes = 10;
  for (auto name : kSyntheticClassNames) data.class_names.emplace_back(name);
  Rng label_rng(MixSeed(seed, 0x1AB3));
  std::vector<int> labels;
  while (static_cast<int>(labels.size()) < count) {
    std::array<int, 10> block{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    for (int i = 9; i > 0; --i) {
      std::swap(block[i], block[label_rng.Below(static_cast<std::uint64_t>(i) + 1)]);
    }
    labels.insert(labels.end(), block.begin(), block.end());
  }
  labels.resize(count);
  for (int i = 0; i < count; ++i) {
    ImageTensor image = GenerateSyntheticImage(seed, static_cast<std::uint64_t>(i), labels[i]);
    char id[64];
    std::snprintf(id, sizeof(id), "%.*s:%06d", static_cast<int>(tag.size()), tag.data(), i);
    image.source_id = id;
    data.images.push_back(std::move(image));
    data.labels.push_back(labels[i]);
  }
  return data;
}

void WriteSyntheticCifar(const std::filesystem::path& dir, const SyntheticSpec& spec) {
  std::filesystem::create_directories(dir);
  const Dataset train = GenerateSyntheticDataset(spec.train_count, spec.seed, "train");
  const Dataset test = GenerateSyntheticDataset(spec.test_count, MixSeed(spec.seed, 7), "test");
  const std::size_t per_batch = (train.size() + 4) / 5;
  for (int b = 0; b < 5; ++b) {
    const std::size_t begin = std::min(train.size(), b * per_batch);
    const std::size_t end = std::min(train.size(), begin + per_batch);
    WriteCifar10BatchFile(dir / ("data_batch_" + std::to_string(b + 1) + ".bin"), train,
                          begin, end);
  }
  WriteCifar10BatchFile(dir / "test_batch.bin", test, 0, test.size());
  std::ofstream meta(dir / "batches.meta.txt");
  for (auto name : kSyntheticClassNames) meta << name << "\n";
}

}  // namespace voice::net
