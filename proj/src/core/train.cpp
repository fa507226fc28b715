// Copyright 2026 The EvoNorm Search Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "error.hpp"

namespace evonorm {

namespace {

constexpr std::uint64_t kInitTag = 1;
constexpr std::uint64_t kBatchTag = 2;

// Epoch-wise shuffled index stream.
class BatchSampler {
 public:
  BatchSampler(int rows, std::uint64_t seed) : order_(rows), rng_(seed) {
    std::iota(order_.begin(), order_.end(), 0);
    std::shuffle(order_.begin(), order_.end(), rng_);
  }

  std::vector<int> Next(int batch) {
    std::vector<int> out;
    out.reserve(batch);
    while (static_cast<int>(out.size()) < batch) {
      if (pos_ == order_.size()) {
        std::shuffle(order_.begin(), order_.end(), rng_);
        pos_ = 0;
      }
      out.push_back(order_[pos_++]);
    }
    return out;
  }

 private:
  std::vector<int> order_;
  std::mt19937_64 rng_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t DeriveSeed(std::uint64_t seed, std::uint64_t tag,
                         std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(tag),
                    static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (std::uint64_t{words[0]} << 32) | words[1];
}

double Accuracy(AnchorModel& model, const Split& split, int eval_batch) {
  if (split.size() == 0) return 0.0;
  eval_batch = std::max(1, eval_batch);
  int correct = 0;
  for (int begin = 0; begin < split.size(); begin += eval_batch) {
    const int end = std::min(split.size(), begin + eval_batch);
    std::vector<int> rows(end - begin);
    std::iota(rows.begin(), rows.end(), begin);
    const Tensor logits = model.PredictLogits(GatherImages(split, rows));
    const int classes = logits.channels();
    for (int i = 0; i < end - begin; ++i) {
      const auto row = logits.data().subspan(static_cast<std::size_t>(i) * classes, classes);
      if (!std::all_of(row.begin(), row.end(), [](double v) { return std::isfinite(v); })) {
        continue;
      }
      const int predicted =
          static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
      if (predicted == split.labels[begin + i]) ++correct;
    }
  }
  return static_cast<double>(correct) / split.size();
}

TrainReport TrainEval(const AnchorSpec& spec, const LayerGraph& layer,
                      const Split& train, const Split& eval,
                      const TrainConfig& config, std::uint64_t seed) {
  if (config.steps < 0 || config.batch < 1) {
    Fail(ErrorCode::kConfig, "train steps must be >= 0 and batch >= 1");
  }
  AnchorModel model(spec, layer, DeriveSeed(seed, kInitTag), config.ema_momentum);
  BatchSampler sampler(train.size(), DeriveSeed(seed, kBatchTag));
  TrainReport report;
  report.loss_trace.reserve(config.steps);
  SgdState state;
  std::vector<Tensor> grads;
  const int batch = std::min(config.batch, train.size());
  for (int step = 0; step < config.steps; ++step) {
    const std::vector<int> rows = sampler.Next(batch);
    const double loss = model.LossAndGradients(GatherImages(train, rows),
                                               GatherLabels(train, rows), grads);
    report.loss_trace.push_back(loss);
    if (!std::isfinite(loss)) {
      report.non_finite = true;
      return report;
    }
    const double lr = LearningRateAt(config.schedule, config.lr, step,
                                     config.steps, config.warmup);
    SgdStep(model.parameters(), grads, state, config.sgd, lr);
    report.steps = step + 1;
    for (const Tensor& p : model.parameters()) {
      if (!p.AllFinite()) {
        report.non_finite = true;
        return report;
      }
    }
  }
  report.accuracy = Accuracy(model, eval, config.eval_batch);
  return report;
}

}  // namespace evonorm
