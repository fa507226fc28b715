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


#include "dataset.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>
#include <random>

#include "error.hpp"

namespace evonorm {

namespace {

constexpr int kCifarSide = 32;
constexpr int kCifarPixels = kCifarSide * kCifarSide;
constexpr int kCifarRecord = 1 + 3 * kCifarPixels;
constexpr double kCifarMean[3] = {0.4914, 0.4822, 0.4465};
constexpr double kCifarStd[3] = {0.2470, 0.2435, 0.2616};

Split Concatenate(std::vector<Split> parts) {
  int total = 0;
  for (const Split& p : parts) total += p.size();
  Split out;
  if (parts.empty()) return out;
  Shape shape = parts.front().images.shape();
  shape.n = total;
  std::vector<double> data;
  data.reserve(shape.size());
  for (Split& p : parts) {
    auto d = p.images.data();
    data.insert(data.end(), d.begin(), d.end());
    out.labels.insert(out.labels.end(), p.labels.begin(), p.labels.end());
  }
  out.images = Tensor(shape, std::move(data));
  return out;
}

}  // namespace

Tensor GatherImages(const Split& split, std::span<const int> indices) {
  Shape shape = split.images.shape();
  const std::size_t row = static_cast<std::size_t>(shape.h) * shape.w * shape.c;
  shape.n = static_cast<int>(indices.size());
  Tensor out(shape);
  auto src = split.images.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const int r = indices[i];
    if (r < 0 || r >= split.size()) {
      Fail(ErrorCode::kInvalidArgument, "row " + std::to_string(r) + " out of range");
    }
    std::copy_n(src.begin() + r * row, row, dst.begin() + i * row);
  }
  return out;
}

std::vector<int> GatherLabels(const Split& split, std::span<const int> indices) {
  std::vector<int> out;
  out.reserve(indices.size());
  for (int r : indices) out.push_back(split.labels.at(r));
  return out;
}

Split Slice(const Split& split, int begin, int end) {
  if (begin < 0 || end > split.size() || begin >= end) {
    Fail(ErrorCode::kInvalidArgument, "bad slice [" + std::to_string(begin) +
                                          ", " + std::to_string(end) + ")");
  }
  std::vector<int> rows(end - begin);
  for (int i = begin; i < end; ++i) rows[i - begin] = i;
  return {GatherImages(split, rows), GatherLabels(split, rows)};
}

std::pair<Split, Split> Partition(const Split& split, double fraction) {
  const int cut = static_cast<int>(std::lround(fraction * split.size()));
  if (cut <= 0 || cut >= split.size()) {
    Fail(ErrorCode::kInvalidArgument, "partition leaves an empty side");
  }
  return {Slice(split, 0, cut), Slice(split, cut, split.size())};
}

Split MakeSyntheticSplit(const SyntheticConfig& config, int count,
                         std::uint64_t seed) {
  if (config.image_size < 1 || count < 1) {
    Fail(ErrorCode::kInvalidArgument, "dataset sizes must be positive");
  }
  const int side = config.image_size;
  // Noise-free class templates.
  std::vector<std::vector<double>> templates(kNumClasses);
  for (int k = 0; k < kNumClasses; ++k) {
    const double angle = k * std::numbers::pi / kNumClasses;
    const double cx = std::cos(angle);
    const double cy = std::sin(angle);
    templates[k].resize(static_cast<std::size_t>(side) * side);
    for (int i = 0; i < side; ++i) {
      for (int j = 0; j < side; ++j) {
        const double u = j - 0.5 * (side - 1);
        const double v = i - 0.5 * (side - 1);
        templates[k][i * side + j] =
            std::sin(2.0 * std::numbers::pi * config.frequency * (u * cx + v * cy));
      }
    }
  }
  Split split;
  split.images = Tensor(Shape{count, side, side, 3});
  split.labels.resize(count);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  auto d = split.images.data();
  std::size_t p = 0;
  for (int n = 0; n < count; ++n) {
    const int label = n % kNumClasses;
    split.labels[n] = label;
    for (int i = 0; i < side * side; ++i) {
      for (int c = 0; c < 3; ++c) {
        d[p++] = templates[label][i] + config.noise * noise(rng);
      }
    }
  }
  return split;
}

Dataset MakeSyntheticDataset(const SyntheticConfig& config, std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x5eedu};
  std::uint64_t seeds[2];
  std::uint32_t words[4];
  seq.generate(std::begin(words), std::end(words));
  seeds[0] = (std::uint64_t{words[0]} << 32) | words[1];
  seeds[1] = (std::uint64_t{words[2]} << 32) | words[3];
  return Dataset(MakeSyntheticSplit(config, config.train, seeds[0]),
                 MakeSyntheticSplit(config, config.validation, seeds[1]));
}

Split ReadCifar10File(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kIo, "cannot open " + path);
  const std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                         std::istreambuf_iterator<char>());
  if (bytes.empty() || bytes.size() % kCifarRecord != 0) {
    Fail(ErrorCode::kIo, path + ": size " + std::to_string(bytes.size()) +
                             " is not a multiple of " +
                             std::to_string(kCifarRecord));
  }
  const int count = static_cast<int>(bytes.size() / kCifarRecord);
  Split split;
  split.images = Tensor(Shape{count, kCifarSide, kCifarSide, 3});
  split.labels.resize(count);
  for (int n = 0; n < count; ++n) {
    const unsigned char* rec = bytes.data() + static_cast<std::size_t>(n) * kCifarRecord;
    if (rec[0] >= kNumClasses) {
      Fail(ErrorCode::kIo, path + ": record " + std::to_string(n) +
                               " has label " + std::to_string(rec[0]));
    }
    split.labels[n] = rec[0];
    for (int c = 0; c < 3; ++c) {
      for (int i = 0; i < kCifarPixels; ++i) {
        const double v = rec[1 + c * kCifarPixels + i] / 255.0;
        split.images.at(n, i / kCifarSide, i % kCifarSide, c) =
            (v - kCifarMean[c]) / kCifarStd[c];
      }
    }
  }
  return split;
}

Dataset LoadCifar10(const std::string& directory) {
  std::vector<Split> train;
  for (int i = 1; i <= 5; ++i) {
    train.push_back(
        ReadCifar10File(directory + "/data_batch_" + std::to_string(i) + ".bin"));
  }
  return Dataset(Concatenate(std::move(train)),
                 ReadCifar10File(directory + "/test_batch.bin"));
}

}  // namespace evonorm
