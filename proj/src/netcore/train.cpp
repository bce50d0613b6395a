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

#include "voice/netcore/train.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>

#include "voice/common/error.hpp"
#include "voice/common/random.hpp"

namespace voice::net {
namespace {

ImageTensor Augment(const ImageTensor& x, Rng& rng) {
  const bool flip = rng.Uniform() < 0.5;
  const int dx = static_cast<int>(rng.Below(5)) - 2;
  const int dy = static_cast<int>(rng.Below(5)) - 2;
  ImageTensor out = x;
  for (int y = 0; y < x.height; ++y) {
    const int sy = std::clamp(y - dy, 0, x.height - 1);
    for (int col = 0; col < x.width; ++col) {
      int sx = std::clamp(col - dx, 0, x.width - 1);
      if (flip) sx = x.width - 1 - sx;
      for (int c = 0; c < x.channels; ++c) out.at(y, col, c) = x.at(sy, sx, c);
    }
  }
  return out;
}

}  // namespace

Model TrainReferenceModel(const Dataset& train, const TrainConfig& config,
                          const TrainProgress& progress) {
  Model model = MakeBundledModel(train.num_classes, MixSeed(config.seed, 0x1417));
  TrainModel(model, train, config, progress);
  return model;
}

void TrainModel(Model& model, const Dataset& train, const TrainConfig& config,
                const TrainProgress& progress) {
  if (train.num_classes != model.num_classes()) {
    throw Error(ErrorCode::kClassCountMismatch,
                "dataset has " + std::to_string(train.num_classes) + " classes, model " +
                    std::to_string(model.num_classes()));
  }
  if (config.epochs < 0 || config.batch_size < 1) {
    throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 0 and batch_size >= 1");
  }
  if (config.epochs == 0 || train.size() == 0) return;

  const Network<float>& net = model.network();
  const std::size_t n_params = net.params().size();
  std::vector<float> grad(n_params), m1(n_params, 0.0f), m2(n_params, 0.0f);
  const std::size_t n = train.size();
  const std::size_t steps_per_epoch = (n + config.batch_size - 1) / config.batch_size;
  const std::size_t total_steps = steps_per_epoch * config.epochs;
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;

  Rng rng(MixSeed(config.seed, 0x7124));
  std::vector<std::size_t> order(n);
  std::size_t step = 0;
  const int num_classes = model.num_classes();

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[rng.Below(i + 1)]);
    double loss_sum = 0.0;
    std::size_t hits = 0;

    for (std::size_t start = 0; start < n; start += config.batch_size) {
      const std::size_t end = std::min(n, start + config.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0f);
      for (std::size_t k = start; k < end; ++k) {
        const std::size_t idx = order[k];
        const ImageTensor input =
            config.augment ? Augment(train.images[idx], rng) : train.images[idx];
        const auto trace = net.ForwardTrace(model.PrepareInput(input));
        const auto& logits = trace.back().data;
        const double max_logit = *std::max_element(logits.begin(), logits.end());
        double z = 0.0;
        for (float v : logits) z += std::exp(v - max_logit);
        const int label = train.labels[idx];
        loss_sum += max_logit + std::log(z) - logits[label];
        const int argmax = static_cast<int>(
            std::max_element(logits.begin(), logits.end()) - logits.begin());
        hits += argmax == label ? 1 : 0;
        Tensor<float> g(trace.back().shape);
        for (int c = 0; c < num_classes; ++c) {
          g.data[c] = static_cast<float>(std::exp(logits[c] - max_logit) / z -
                                         (c == label ? 1.0 : 0.0));
        }
        net.Backward(trace, g, net.layer_count(), ReluMode::kStandard, grad);
      }

      ++step;
      double lr = config.learning_rate;
      if (step <= static_cast<std::size_t>(config.warmup_steps)) {
        lr *= static_cast<double>(step) / config.warmup_steps;
      } else {
        const double progress_frac = static_cast<double>(step - config.warmup_steps) /
                                     std::max<std::size_t>(1, total_steps - config.warmup_steps);
        lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * std::min(1.0, progress_frac)));
      }
      const double inv_batch = 1.0 / static_cast<double>(end - start);
      const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));
      auto params = model.mutable_network().params();
      for (std::size_t p = 0; p < n_params; ++p) {
        const double g = grad[p] * inv_batch;
        m1[p] = static_cast<float>(kBeta1 * m1[p] + (1 - kBeta1) * g);
        m2[p] = static_cast<float>(kBeta2 * m2[p] + (1 - kBeta2) * g * g);
        const double update = (m1[p] / bc1) / (std::sqrt(m2[p] / bc2) + kEps);
        params[p] = static_cast<float>(params[p] - lr * (update + config.weight_decay * params[p]));
      }
    }

    if (progress) {
      EpochStats stats;
      stats.epoch = epoch + 1;
      stats.mean_loss = loss_sum / static_cast<double>(n);
      stats.train_accuracy = static_cast<double>(hits) / static_cast<double>(n);
      stats.seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      progress(stats);
    }
  }
}

double EvaluateAccuracy(Model& model, const Dataset& data, std::size_t limit) {
  const std::size_t n = limit == 0 ? data.size() : std::min(limit, data.size());
  if (n == 0) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    hits += model.Forward(data.images[i]).predicted == data.labels[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace voice::net
