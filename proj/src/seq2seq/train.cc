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

#include "confparse/seq2seq/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace confparse {

EncodedExample encode_example(const Seq2SeqModel& model, const Example& ex) {
  require(!ex.source.empty() && !ex.target.empty(), "encode_example: empty example");
  EncodedExample out;
  out.source = model.source_vocab().encode(ex.source);
  out.target = model.target_vocab().encode(ex.target);
  out.target.push_back(Vocab::kEos);
  return out;
}

double loss_and_gradient(const Seq2SeqModel& model, const EncodedExample& ex, ParamStore& grads,
                         NoiseInjector* noise) {
  TracedGraph graph(&model.params());
  const ForcedPass pass = teacher_forced(model, graph, ex.source, ex.target, noise);
  // d(-log softmax_y(z))/dz = p - onehot(y)
  std::vector<std::pair<NodeId, Vec>> seeds;
  seeds.reserve(pass.steps.size());
  for (std::size_t t = 0; t < pass.steps.size(); ++t) {
    Vec g = graph.value(pass.steps[t].probs);
    g[Seq2SeqModel::token_to_class(ex.target[t])] -= 1.0;
    seeds.emplace_back(pass.steps[t].logits, std::move(g));
  }
  graph.backward(seeds, grads);
  return -pass.logprob;
}

double mean_token_nll(const Seq2SeqModel& model, std::span<const EncodedExample> data) {
  double total = 0.0;
  std::size_t tokens = 0;
  for (const EncodedExample& ex : data) {
    total -= sequence_logprob(model, ex.source, ex.target);
    tokens += ex.target.size();
  }
  return tokens == 0 ? 0.0 : total / static_cast<double>(tokens);
}

TrainResult train(Seq2SeqModel& model, std::span<const Example> train_set,
                  std::span<const Example> dev_set, const TrainConfig& config,
                  const std::function<void(int, double, double)>& on_epoch) {
  require(!train_set.empty(), "train: empty corpus");
  require(config.batch_size >= 1, "train: batch size must be >= 1");
  std::vector<EncodedExample> train_data;
  for (const Example& ex : train_set) train_data.push_back(encode_example(model, ex));
  std::vector<EncodedExample> dev_data;
  for (const Example& ex : dev_set) dev_data.push_back(encode_example(model, ex));

  TrainResult result;
  if (config.epochs <= 0) return result;

  ParamStore grads = model.params().zeros_like();
  ParamStore cache = model.params().zeros_like();
  ParamStore best = model.params();
  double best_dev = std::numeric_limits<double>::infinity();
  RngStream order_rng = RngStream(config.seed).fork(0);
  const RngStream dropout_root = RngStream(config.seed).fork(1);
  std::vector<std::size_t> order(train_data.size());
  std::iota(order.begin(), order.end(), 0);
  std::uint64_t example_counter = 0;

  NoiseSpec drop;
  drop.kind = NoiseKind::kDropout;
  drop.strength = config.dropout;
  drop.sites = kAllSites;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[order_rng.below(i)]);
    }
    double epoch_loss = 0.0;
    std::size_t epoch_tokens = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      grads.set_zero();
      for (std::size_t j = start; j < end; ++j) {
        const EncodedExample& ex = train_data[order[j]];
        NoiseInjector noise(drop, dropout_root.fork(example_counter++));
        const double loss = loss_and_gradient(model, ex, grads, &noise);
        if (!std::isfinite(loss)) {
          std::ostringstream msg;
          msg << "train: non-finite loss at epoch " << epoch << ", example " << order[j]
              << "; lower the learning rate or check the clip norm";
          throw Error(msg.str());
        }
        epoch_loss += loss;
        epoch_tokens += ex.target.size();
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      double norm = std::sqrt(grads.squared_norm()) * inv;
      const double scale = norm > config.clip_norm ? inv * config.clip_norm / norm : inv;
      for (std::size_t p = 0; p < grads.size(); ++p) {
        const auto id = static_cast<ParamId>(p);
        auto g = grads.at(id).flat();
        auto c = cache.at(id).flat();
        auto w = model.params().at(id).flat();
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double gi = g[i] * scale;
          c[i] = config.rms_decay * c[i] + (1.0 - config.rms_decay) * gi * gi;
          w[i] -= config.learning_rate * gi / (std::sqrt(c[i]) + config.rms_epsilon);
        }
      }
    }
    const double train_loss = epoch_loss / static_cast<double>(epoch_tokens);
    const double dev_loss = dev_data.empty() ? train_loss : mean_token_nll(model, dev_data);
    result.train_loss.push_back(train_loss);
    result.dev_loss.push_back(dev_loss);
    if (dev_loss < best_dev) {
      best_dev = dev_loss;
      best = model.params();
      result.best_epoch = epoch;
    }
    if (on_epoch) on_epoch(epoch, train_loss, dev_loss);
  }
  if (config.keep_best && result.best_epoch >= 0) model.params() = best;
  return result;
}

}  // namespace confparse
