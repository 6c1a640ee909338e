// Copyright 2026 The confparse Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CONFPARSE_SEQ2SEQ_TRAIN_H_
#define CONFPARSE_SEQ2SEQ_TRAIN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "confparse/seq2seq/model.h"

namespace confparse {

struct TrainConfig {
  int epochs = 15;
  std::size_t batch_size = 10;
  double learning_rate = 0.002;
  double rms_decay = 0.95;
  double rms_epsilon = 1e-8;
  double dropout = 0.25;
  double clip_norm = 5.0;
  std::uint64_t seed = 1;
  // Restore the parameters of the epoch with the lowest dev loss.
  bool keep_best = true;
};

struct EncodedExample {
  std::vector<TokenId> source;
  std::vector<TokenId> target;  // ends with EOS
};

EncodedExample encode_example(const Seq2SeqModel& model, const Example& ex);

struct TrainResult {
  std::vector<double> train_loss;  // mean per-token NLL, with dropout
  std::vector<double> dev_loss;    // mean per-token NLL, clean
  int best_epoch = -1;
};

// -log p(a|q) and its gradient, accumulated into `grads`. Dropout is
// applied when `noise` is given.
double loss_and_gradient(const Seq2SeqModel& model, const EncodedExample& ex, ParamStore& grads,
                         NoiseInjector* noise = nullptr);

// Mean per-token NLL without perturbation.
double mean_token_nll(const Seq2SeqModel& model, std::span<const EncodedExample> data);

// RMSProp on sum_{(q,a)} log p(a|q) over mini-batches. Deterministic under
// config.seed. Throws Error if the loss becomes non-finite.
TrainResult train(Seq2SeqModel& model, std::span<const Example> train_set,
                  std::span<const Example> dev_set, const TrainConfig& config,
                  const std::function<void(int, double, double)>& on_epoch = {});

}  // namespace confparse

#endif  // CONFPARSE_SEQ2SEQ_TRAIN_H_
