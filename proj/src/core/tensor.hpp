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

// Dense NHWC tensors and the element-wise / aggregation primitives of the
// layer search space. Everything here is a pure function of its inputs; the
// differentiable wrappers live in autodiff.hpp.

#ifndef EVONORM_CORE_TENSOR_HPP_
#define EVONORM_CORE_TENSOR_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace evonorm {

// Added inside the square root of the second-order moments and inside the
// absolute value of the signed logarithm.
inline constexpr double kMomentEpsilon = 1e-5;

struct Shape {
  int n = 1;
  int h = 1;
  int w = 1;
  int c = 1;

  std::size_t size() const {
    return static_cast<std::size_t>(n) * h * w * c;
  }
  bool operator==(const Shape&) const = default;
  std::string ToString() const;
};

class Tensor {
 public:
  Tensor() : Tensor(Shape{}) {}
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> data);

  // A (1, 1, 1, c) tensor holding `values`.
  static Tensor ChannelVector(std::span<const double> values);
  static Tensor Scalar(double value) { return Tensor(Shape{}, value); }

  const Shape& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }
  int channels() const { return shape_.c; }
  bool is_channel_vector() const {
    return shape_.n == 1 && shape_.h == 1 && shape_.w == 1;
  }

  std::span<const double> data() const { return data_; }
  std::span<double> data() { return data_; }
  double operator[](std::size_t i) const { return data_[i]; }
  double& operator[](std::size_t i) { return data_[i]; }

  std::size_t Offset(int n, int h, int w, int c) const {
    return ((static_cast<std::size_t>(n) * shape_.h + h) * shape_.w + w) *
               shape_.c +
           c;
  }
  double at(int n, int h, int w, int c) const { return data_[Offset(n, h, w, c)]; }
  double& at(int n, int h, int w, int c) { return data_[Offset(n, h, w, c)]; }

  bool AllFinite() const;
  bool operator==(const Tensor&) const = default;

 private:
  Shape shape_;
  std::vector<double> data_;
};

enum class Primitive : std::uint8_t {
  kAdd,
  kMul,
  kDiv,
  kMax,
  kNeg,
  kSigmoid,
  kTanh,
  kExp,
  kLog,
  kAbs,
  kSquare,
  kSqrt,
  kMean,
  kRmsMoment,
  kStdMoment,
};

inline constexpr int kNumPrimitives = 15;

// Axes a moment aggregates over: (b,w,h), (w,h,c), (w,h) or (w,h,c/g).
enum class Axes : std::uint8_t { kBWH, kWHC, kWH, kWHCg };

struct IndexSet {
  Axes axes = Axes::kWH;
  int groups = 1;  // only meaningful for kWHCg

  bool operator==(const IndexSet&) const = default;
};

inline bool IsMoment(Primitive p) {
  return p == Primitive::kMean || p == Primitive::kRmsMoment ||
         p == Primitive::kStdMoment;
}
inline int Arity(Primitive p) {
  switch (p) {
    case Primitive::kAdd:
    case Primitive::kMul:
    case Primitive::kDiv:
    case Primitive::kMax:
      return 2;
    default:
      return 1;
  }
}

const char* PrimitiveName(Primitive p);
const char* AxesName(Axes a);

// Maps every element onto its aggregation cell. Cell ids are
// `n * n_stride + channel_cell[c]`.
class CellMap {
 public:
  CellMap(const Shape& shape, IndexSet index);

  int num_cells() const { return num_cells_; }
  int cell_size() const { return cell_size_; }
  int Cell(int n, int c) const { return n * n_stride_ + channel_cell_[c]; }

 private:
  int num_cells_ = 0;
  int cell_size_ = 0;
  int n_stride_ = 0;
  std::vector<int> channel_cell_;
};

// Per-cell statistic (length num_cells) of a moment primitive.
std::vector<double> CellStatistic(Primitive moment, const CellMap& cells,
                                  const Tensor& x);
// Per-cell mean, the building block of every moment.
std::vector<double> CellMean(const CellMap& cells, const Tensor& x);
// Writes cell values back onto every element of a tensor shaped like x.
Tensor Spread(const CellMap& cells, std::span<const double> per_cell,
              const Shape& shape);

double EvalUnaryScalar(Primitive kind, double x);
double EvalBinaryScalar(Primitive kind, double x, double y);

// Visits every element of a broadcast binary op: f(out, a, b) with flat
// indices into the output and the two operands. An operand that is not
// full-size is a channel vector of `channels` entries.
template <class F>
void ForEachBroadcast(std::size_t size, std::size_t channels, bool a_full,
                      bool b_full, F&& f) {
  if (a_full && b_full) {
    for (std::size_t i = 0; i < size; ++i) f(i, i, i);
    return;
  }
  for (std::size_t base = 0; base < size; base += channels) {
    for (std::size_t k = 0; k < channels; ++k) {
      const std::size_t i = base + k;
      f(i, a_full ? i : k, b_full ? i : k);
    }
  }
}

Tensor EvalUnary(Primitive kind, const Tensor& x);
// Equal shapes, or one side a (1,1,1,c) channel vector broadcast over the
// other. Any other combination throws kShapeMismatch.
Tensor EvalBinary(Primitive kind, const Tensor& x, const Tensor& y);
Tensor EvalMoment(Primitive kind, IndexSet index, const Tensor& x);

// Result shape of a broadcasting binary op; throws on mismatch.
Shape BroadcastShape(const Shape& a, const Shape& b);

enum class Padding { kSame, kValid };

struct ConvGeometry {
  int out_h = 0;
  int out_w = 0;
  int pad_top = 0;
  int pad_left = 0;
};

// Weights are (kh, kw, c_in / groups, c_out) stored in Tensor fields
// (n, h, w, c).
ConvGeometry ComputeConvGeometry(const Shape& x, const Shape& weights,
                                 int stride, Padding padding, int groups);
Tensor Conv2D(const Tensor& x, const Tensor& weights, int stride,
              Padding padding, int groups);
void Conv2DBackward(const Tensor& x, const Tensor& weights, int stride,
                    Padding padding, int groups, const Tensor& grad_out,
                    Tensor* grad_x, Tensor* grad_weights);

Tensor GlobalAvgPool(const Tensor& x);
// x: (n,1,1,c_in); weights: (1,1,c_in,c_out); bias: (1,1,1,c_out).
Tensor Dense(const Tensor& x, const Tensor& weights, const Tensor& bias);

// Mean softmax cross-entropy of logits (n,1,1,k) against labels in [0,k).
double SoftmaxCrossEntropy(const Tensor& logits, std::span<const int> labels);
// d(loss)/d(logits) for the mean loss above.
Tensor SoftmaxCrossEntropyGrad(const Tensor& logits,
                               std::span<const int> labels);

}  // namespace evonorm

#endif  // EVONORM_CORE_TENSOR_HPP_
