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

#ifndef VOICE_NETCORE_TRAIN_HPP_
#define VOICE_NETCORE_TRAIN_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>

#include "voice/netcore/dataset.hpp"
#include "voice/netcore/model.hpp"

namespace voice::net {

// The bundled recipe: AdamW with linear warmup and cosine decay, random
// horizontal flips and +-2 px translations. Single-threaded and fully
// deterministic for a given seed.
struct TrainConfig {
  int epochs = 8;
  int batch_size = 64;
  double learning_rate = 2e-3;
  double weight_decay = 5e-4;
  int warmup_steps = 150;
  std::uint64_t seed = 1;
  bool augment = true;
};

struct EpochStats {
  int epoch = 0;
  double mean_loss = 0.0;
  double train_accuracy = 0.0;
  double seconds = 0.0;
};

using TrainProgress = std::function<void(const EpochStats&)>;

// Initializes the bundled architecture from `config.seed` and trains it.
// With epochs == 0 the returned weights equal the initialization.
Model TrainReferenceModel(const Dataset& train, const TrainConfig& config,
                          const TrainProgress& progress = {});

// Trains `model` in place. Throws kClassCountMismatch if the dataset and the
// model disagree on the number of classes.
void TrainModel(Model& model, const Dataset& train, const TrainConfig& config,
                const TrainProgress& progress = {});

// Top-1 accuracy over the first `limit` images (all when 0).
double EvaluateAccuracy(Model& model, const Dataset& data, std::size_t limit = 0);

}  // namespace voice::net

#endif  // VOICE_NETCORE_TRAIN_HPP_
