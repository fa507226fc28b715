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


// Image classification data for the proxy tasks: a deterministic
// oriented-sinusoid texture set, and a reader for the CIFAR-10 binary
// format when those files are available locally.

#ifndef EVONORM_CORE_DATASET_HPP_
#define EVONORM_CORE_DATASET_HPP_

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tensor.hpp"

namespace evonorm {

inline constexpr int kNumClasses = 10;

struct Split {
  Tensor images;  // (n, h, w, 3)
  std::vector<int> labels;

  int size() const { return static_cast<int>(labels.size()); }
};

// Rows `indices` of `split` as a batch.
Tensor GatherImages(const Split& split, std::span<const int> indices);
std::vector<int> GatherLabels(const Split& split, std::span<const int> indices);

// Rows [begin, end).
Split Slice(const Split& split, int begin, int end);

// The first `fraction` of the rows and the remainder.
std::pair<Split, Split> Partition(const Split& split, double fraction);

struct SyntheticConfig {
  int image_size = 16;
  int train = 2048;
  int validation = 512;
  double noise = 0.3;
  // Cycles per pixel of the class texture.
  double frequency = 0.25;
};

// Holds a train and a validation split and counts reads of each, so that
// tests can check which split a procedure touched.
class Dataset {
 public:
  Dataset(Split train, Split validation)
      : train_(std::move(train)), validation_(std::move(validation)) {}
  Dataset(const Dataset&) = delete;
  Dataset& operator=(const Dataset&) = delete;

  const Split& train() const {
    train_reads_.fetch_add(1, std::memory_order_relaxed);
    return train_;
  }
  const Split& validation() const {
    validation_reads_.fetch_add(1, std::memory_order_relaxed);
    return validation_;
  }
  long train_reads() const { return train_reads_.load(); }
  long validation_reads() const { return validation_reads_.load(); }

 private:
  Split train_;
  Split validation_;
  mutable std::atomic<long> train_reads_{0};
  mutable std::atomic<long> validation_reads_{0};
};

// Class k is a sinusoid at orientation k*pi/10 with fixed phase, plus
// independent Gaussian pixel noise. Labels cycle through the classes.
Split MakeSyntheticSplit(const SyntheticConfig& config, int count,
                         std::uint64_t seed);
Dataset MakeSyntheticDataset(const SyntheticConfig& config, std::uint64_t seed);

// Reads data_batch_1..5.bin as the train split and test_batch.bin as the
// validation split from `directory`.
Dataset LoadCifar10(const std::string& directory);
// One file of 3073-byte records (label byte, then 1024 bytes per channel).
// Pixels are scaled to [0, 1] and standardized with fixed per-channel
// CIFAR-10 statistics.
Split ReadCifar10File(const std::string& path);

}  // namespace evonorm

#endif  // EVONORM_CORE_DATASET_HPP_
