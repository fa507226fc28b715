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

#include "tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "error.hpp"

namespace evonorm {

namespace {

void CheckShape(const Shape& s) {
  if (s.n < 1 || s.h < 1 || s.w < 1 || s.c < 1) {
    Fail(ErrorCode::kShapeMismatch,
         "tensor dimensions must be positive, got " + s.ToString());
  }
}

double SignOf(double x) { return static_cast<double>((x > 0) - (x < 0)); }

}  // namespace

std::string Shape::ToString() const {
  std::ostringstream os;
  os << "(" << n << "," << h << "," << w << "," << c << ")";
  return os.str();
}

Tensor::Tensor(Shape shape, double fill) : shape_(shape) {
  CheckShape(shape_);
  data_.assign(shape_.size(), fill);
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(shape), data_(std::move(data)) {
  CheckShape(shape_);
  if (data_.size() != shape_.size()) {
    Fail(ErrorCode::kShapeMismatch,
         "data length " + std::to_string(data_.size()) +
             " does not match shape " + shape_.ToString());
  }
}

Tensor Tensor::ChannelVector(std::span<const double> values) {
  return Tensor(Shape{1, 1, 1, static_cast<int>(values.size())},
                std::vector<double>(values.begin(), values.end()));
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

const char* PrimitiveName(Primitive p) {
  switch (p) {
    case Primitive::kAdd: return "add";
    case Primitive::kMul: return "mul";
    case Primitive::kDiv: return "div";
    case Primitive::kMax: return "max";
    case Primitive::kNeg: return "neg";
    case Primitive::kSigmoid: return "sigmoid";
    case Primitive::kTanh: return "tanh";
    case Primitive::kExp: return "exp";
    case Primitive::kLog: return "log";
    case Primitive::kAbs: return "abs";
    case Primitive::kSquare: return "square";
    case Primitive::kSqrt: return "sqrt";
    case Primitive::kMean: return "mean";
    case Primitive::kRmsMoment: return "rms";
    case Primitive::kStdMoment: return "std";
  }
  return "?";
}

const char* AxesName(Axes a) {
  switch (a) {
    case Axes::kBWH: return "bwh";
    case Axes::kWHC: return "whc";
    case Axes::kWH: return "wh";
    case Axes::kWHCg: return "whcg";
  }
  return "?";
}

CellMap::CellMap(const Shape& shape, IndexSet index)
    : channel_cell_(shape.c) {
  const int hw = shape.h * shape.w;
  switch (index.axes) {
    case Axes::kBWH:
      num_cells_ = shape.c;
      cell_size_ = shape.n * hw;
      n_stride_ = 0;
      for (int c = 0; c < shape.c; ++c) channel_cell_[c] = c;
      break;
    case Axes::kWHC:
      num_cells_ = shape.n;
      cell_size_ = hw * shape.c;
      n_stride_ = 1;
      break;
    case Axes::kWH:
      num_cells_ = shape.n * shape.c;
      cell_size_ = hw;
      n_stride_ = shape.c;
      for (int c = 0; c < shape.c; ++c) channel_cell_[c] = c;
      break;
    case Axes::kWHCg: {
      if (index.groups < 1 || shape.c % index.groups != 0) {
        Fail(ErrorCode::kGroupDivisibility,
             "groups " + std::to_string(index.groups) +
                 " does not divide channel count " + std::to_string(shape.c));
      }
      const int per_group = shape.c / index.groups;
      num_cells_ = shape.n * index.groups;
      cell_size_ = hw * per_group;
      n_stride_ = index.groups;
      for (int c = 0; c < shape.c; ++c) channel_cell_[c] = c / per_group;
      break;
    }
  }
}

std::vector<double> CellMean(const CellMap& cells, const Tensor& x) {
  const Shape& s = x.shape();
  std::vector<double> sum(cells.num_cells(), 0.0);
  const double* p = x.data().data();
  const int hw = s.h * s.w;
  for (int n = 0; n < s.n; ++n) {
    for (int i = 0; i < hw; ++i) {
      for (int c = 0; c < s.c; ++c) sum[cells.Cell(n, c)] += *p++;
    }
  }
  for (double& v : sum) v /= cells.cell_size();
  return sum;
}

std::vector<double> CellStatistic(Primitive moment, const CellMap& cells,
                                  const Tensor& x) {
  const Shape& s = x.shape();
  const int hw = s.h * s.w;
  switch (moment) {
    case Primitive::kMean:
      return CellMean(cells, x);
    case Primitive::kRmsMoment: {
      std::vector<double> acc(cells.num_cells(), 0.0);
      const double* p = x.data().data();
      for (int n = 0; n < s.n; ++n) {
        for (int i = 0; i < hw; ++i) {
          for (int c = 0; c < s.c; ++c, ++p) acc[cells.Cell(n, c)] += *p * *p;
        }
      }
      for (double& v : acc) v = std::sqrt(v / cells.cell_size() + kMomentEpsilon);
      return acc;
    }
    case Primitive::kStdMoment: {
      const std::vector<double> mean = CellMean(cells, x);
      std::vector<double> acc(cells.num_cells(), 0.0);
      const double* p = x.data().data();
      for (int n = 0; n < s.n; ++n) {
        for (int i = 0; i < hw; ++i) {
          for (int c = 0; c < s.c; ++c, ++p) {
            const int cell = cells.Cell(n, c);
            const double d = *p - mean[cell];
            acc[cell] += d * d;
          }
        }
      }
      for (double& v : acc) v = std::sqrt(v / cells.cell_size() + kMomentEpsilon);
      return acc;
    }
    default:
      Fail(ErrorCode::kInvalidArgument,
           std::string("not a moment primitive: ") + PrimitiveName(moment));
  }
}

Tensor Spread(const CellMap& cells, std::span<const double> per_cell,
              const Shape& shape) {
  Tensor out(shape);
  double* p = out.data().data();
  const int hw = shape.h * shape.w;
  for (int n = 0; n < shape.n; ++n) {
    for (int i = 0; i < hw; ++i) {
      for (int c = 0; c < shape.c; ++c) *p++ = per_cell[cells.Cell(n, c)];
    }
  }
  return out;
}

double EvalUnaryScalar(Primitive kind, double x) {
  switch (kind) {
    case Primitive::kNeg: return -x;
    case Primitive::kSigmoid:
      if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
      else {
        const double e = std::exp(x);
        return e / (1.0 + e);
      }
    case Primitive::kTanh: return std::tanh(x);
    case Primitive::kExp: return std::exp(x);
    case Primitive::kLog:
      return SignOf(x) * std::log(std::abs(x) + kMomentEpsilon);
    case Primitive::kAbs: return std::abs(x);
    case Primitive::kSquare: return x * x;
    case Primitive::kSqrt: return SignOf(x) * std::sqrt(std::abs(x));
    default:
      Fail(ErrorCode::kInvalidArgument,
           std::string("not a unary element-wise primitive: ") +
               PrimitiveName(kind));
  }
}

double EvalBinaryScalar(Primitive kind, double x, double y) {
  switch (kind) {
    case Primitive::kAdd: return x + y;
    case Primitive::kMul: return x * y;
    case Primitive::kDiv: return x / y;
    case Primitive::kMax: return (x >= y || std::isnan(x)) ? x : y;
    default:
      Fail(ErrorCode::kInvalidArgument,
           std::string("not a binary primitive: ") + PrimitiveName(kind));
  }
}

Tensor EvalUnary(Primitive kind, const Tensor& x) {
  if (IsMoment(kind) || Arity(kind) != 1) {
    Fail(ErrorCode::kInvalidArgument,
         std::string("EvalUnary needs an element-wise unary op, got ") +
             PrimitiveName(kind));
  }
  Tensor out(x.shape());
  auto in = x.data();
  auto o = out.data();
  for (std::size_t i = 0; i < in.size(); ++i) o[i] = EvalUnaryScalar(kind, in[i]);
  return out;
}

Shape BroadcastShape(const Shape& a, const Shape& b) {
  if (a == b) return a;
  const bool a_vec = a.n == 1 && a.h == 1 && a.w == 1;
  const bool b_vec = b.n == 1 && b.h == 1 && b.w == 1;
  if (b_vec && b.c == a.c) return a;
  if (a_vec && a.c == b.c) return b;
  Fail(ErrorCode::kShapeMismatch, "cannot broadcast " + a.ToString() +
                                      " with " + b.ToString());
}

Tensor EvalBinary(Primitive kind, const Tensor& x, const Tensor& y) {
  const Shape out_shape = BroadcastShape(x.shape(), y.shape());
  Tensor out(out_shape);
  double* o = out.data().data();
  const double* xs = x.data().data();
  const double* ys = y.data().data();
  const bool x_full = x.size() == out.size();
  const bool y_full = y.size() == out.size();
  const std::size_t c = static_cast<std::size_t>(out_shape.c);
  auto run = [&](auto op) {
    ForEachBroadcast(out.size(), c, x_full, y_full,
                     [&](std::size_t i, std::size_t a, std::size_t b) {
                       o[i] = op(xs[a], ys[b]);
                     });
  };
  switch (kind) {
    case Primitive::kAdd: run([](double a, double b) { return a + b; }); break;
    case Primitive::kMul: run([](double a, double b) { return a * b; }); break;
    case Primitive::kDiv: run([](double a, double b) { return a / b; }); break;
    case Primitive::kMax:
      run([](double a, double b) { return (a >= b || std::isnan(a)) ? a : b; });
      break;
    default:
      EvalBinaryScalar(kind, 0.0, 0.0);  // throws for non-binary kinds
  }
  return out;
}

Tensor EvalMoment(Primitive kind, IndexSet index, const Tensor& x) {
  if (!IsMoment(kind)) {
    Fail(ErrorCode::kInvalidArgument,
         std::string("EvalMoment needs a moment op, got ") + PrimitiveName(kind));
  }
  const CellMap cells(x.shape(), index);
  return Spread(cells, CellStatistic(kind, cells, x), x.shape());
}

ConvGeometry ComputeConvGeometry(const Shape& x, const Shape& weights,
                                 int stride, Padding padding, int groups) {
  if (stride < 1) Fail(ErrorCode::kInvalidArgument, "stride must be >= 1");
  if (groups < 1 || x.c % groups != 0 || weights.c % groups != 0) {
    Fail(ErrorCode::kGroupDivisibility,
         "conv groups " + std::to_string(groups) +
             " must divide input channels " + std::to_string(x.c) +
             " and output channels " + std::to_string(weights.c));
  }
  if (weights.w * groups != x.c) {
    Fail(ErrorCode::kShapeMismatch,
         "conv weights " + weights.ToString() + " expect " +
             std::to_string(weights.w * groups) + " input channels, got " +
             std::to_string(x.c));
  }
  ConvGeometry g;
  if (padding == Padding::kSame) {
    g.out_h = (x.h + stride - 1) / stride;
    g.out_w = (x.w + stride - 1) / stride;
    const int pad_h = std::max((g.out_h - 1) * stride + weights.n - x.h, 0);
    const int pad_w = std::max((g.out_w - 1) * stride + weights.h - x.w, 0);
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
  } else {
    if (x.h < weights.n || x.w < weights.h) {
      Fail(ErrorCode::kShapeMismatch,
           "valid convolution kernel larger than input " + x.ToString());
    }
    g.out_h = (x.h - weights.n) / stride + 1;
    g.out_w = (x.w - weights.h) / stride + 1;
  }
  return g;
}

Tensor Conv2D(const Tensor& x, const Tensor& weights, int stride,
              Padding padding, int groups) {
  const Shape& xs = x.shape();
  const Shape& ws = weights.shape();
  const ConvGeometry g = ComputeConvGeometry(xs, ws, stride, padding, groups);
  const int kh = ws.n, kw = ws.h, cin_g = ws.w, cout = ws.c;
  const int cout_g = cout / groups;
  const bool depthwise = cin_g == 1 && cout_g == 1;
  Tensor out(Shape{xs.n, g.out_h, g.out_w, cout});
  const double* xd = x.data().data();
  const double* wd = weights.data().data();
  double* od = out.data().data();
  for (int n = 0; n < xs.n; ++n) {
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox) {
        double* o = od + out.Offset(n, oy, ox, 0);
        for (int ky = 0; ky < kh; ++ky) {
          const int iy = oy * stride - g.pad_top + ky;
          if (iy < 0 || iy >= xs.h) continue;
          for (int kx = 0; kx < kw; ++kx) {
            const int ix = ox * stride - g.pad_left + kx;
            if (ix < 0 || ix >= xs.w) continue;
            const double* xp = xd + x.Offset(n, iy, ix, 0);
            const double* wp = wd + weights.Offset(ky, kx, 0, 0);
            if (depthwise) {
              for (int c = 0; c < cout; ++c) o[c] += xp[c] * wp[c];
              continue;
            }
            for (int grp = 0; grp < groups; ++grp) {
              double* og = o + grp * cout_g;
              for (int ci = 0; ci < cin_g; ++ci) {
                const double xv = xp[grp * cin_g + ci];
                const double* wr = wp + ci * cout + grp * cout_g;
                for (int co = 0; co < cout_g; ++co) og[co] += xv * wr[co];
              }
            }
          }
        }
      }
    }
  }
  return out;
}

void Conv2DBackward(const Tensor& x, const Tensor& weights, int stride,
                    Padding padding, int groups, const Tensor& grad_out,
                    Tensor* grad_x, Tensor* grad_weights) {
  const Shape& xs = x.shape();
  const Shape& ws = weights.shape();
  const ConvGeometry g = ComputeConvGeometry(xs, ws, stride, padding, groups);
  const int kh = ws.n, kw = ws.h, cin_g = ws.w, cout = ws.c;
  const int cout_g = cout / groups;
  const bool depthwise = cin_g == 1 && cout_g == 1;
  if (grad_x) *grad_x = Tensor(xs);
  if (grad_weights) *grad_weights = Tensor(ws);
  const double* xd = x.data().data();
  const double* wd = weights.data().data();
  const double* gd = grad_out.data().data();
  double* gxd = grad_x ? grad_x->data().data() : nullptr;
  double* gwd = grad_weights ? grad_weights->data().data() : nullptr;
  for (int n = 0; n < xs.n; ++n) {
    for (int oy = 0; oy < g.out_h; ++oy) {
      for (int ox = 0; ox < g.out_w; ++ox) {
        const double* go = gd + grad_out.Offset(n, oy, ox, 0);
        for (int ky = 0; ky < kh; ++ky) {
          const int iy = oy * stride - g.pad_top + ky;
          if (iy < 0 || iy >= xs.h) continue;
          for (int kx = 0; kx < kw; ++kx) {
            const int ix = ox * stride - g.pad_left + kx;
            if (ix < 0 || ix >= xs.w) continue;
            const std::size_t xo = x.Offset(n, iy, ix, 0);
            const std::size_t wo = weights.Offset(ky, kx, 0, 0);
            const double* xp = xd + xo;
            const double* wp = wd + wo;
            if (depthwise) {
              if (gxd) {
                double* gx = gxd + xo;
                for (int c = 0; c < cout; ++c) gx[c] += go[c] * wp[c];
              }
              if (gwd) {
                double* gw = gwd + wo;
                for (int c = 0; c < cout; ++c) gw[c] += go[c] * xp[c];
              }
              continue;
            }
            for (int grp = 0; grp < groups; ++grp) {
              const double* gog = go + grp * cout_g;
              for (int ci = 0; ci < cin_g; ++ci) {
                const int cin = grp * cin_g + ci;
                const std::size_t wr = ci * cout + grp * cout_g;
                if (gxd) {
                  double acc = 0.0;
                  for (int co = 0; co < cout_g; ++co) acc += gog[co] * wp[wr + co];
                  gxd[xo + cin] += acc;
                }
                if (gwd) {
                  const double xv = xp[cin];
                  double* gw = gwd + wo + wr;
                  for (int co = 0; co < cout_g; ++co) gw[co] += xv * gog[co];
                }
              }
            }
          }
        }
      }
    }
  }
}

Tensor GlobalAvgPool(const Tensor& x) {
  const Shape& s = x.shape();
  Tensor out(Shape{s.n, 1, 1, s.c});
  const double scale = 1.0 / (s.h * s.w);
  const double* p = x.data().data();
  for (int n = 0; n < s.n; ++n) {
    double* o = out.data().data() + static_cast<std::size_t>(n) * s.c;
    for (int i = 0; i < s.h * s.w; ++i) {
      for (int c = 0; c < s.c; ++c) o[c] += *p++;
    }
    for (int c = 0; c < s.c; ++c) o[c] *= scale;
  }
  return out;
}

Tensor Dense(const Tensor& x, const Tensor& weights, const Tensor& bias) {
  const Shape& s = x.shape();
  const int cin = weights.shape().w;
  const int cout = weights.shape().c;
  if (s.h != 1 || s.w != 1 || s.c != cin || weights.shape().n != 1 ||
      weights.shape().h != 1 || bias.shape() != Shape{1, 1, 1, cout}) {
    Fail(ErrorCode::kShapeMismatch, "dense: input " + s.ToString() +
                                        ", weights " +
                                        weights.shape().ToString() +
                                        ", bias " + bias.shape().ToString());
  }
  Tensor out(Shape{s.n, 1, 1, cout});
  for (int n = 0; n < s.n; ++n) {
    double* o = out.data().data() + static_cast<std::size_t>(n) * cout;
    for (int co = 0; co < cout; ++co) o[co] = bias[co];
    for (int ci = 0; ci < cin; ++ci) {
      const double xv = x[static_cast<std::size_t>(n) * cin + ci];
      const double* wr = weights.data().data() + static_cast<std::size_t>(ci) * cout;
      for (int co = 0; co < cout; ++co) o[co] += xv * wr[co];
    }
  }
  return out;
}

namespace {

void CheckLogits(const Tensor& logits, std::span<const int> labels) {
  const Shape& s = logits.shape();
  if (s.h != 1 || s.w != 1) {
    Fail(ErrorCode::kShapeMismatch,
         "logits must be (n,1,1,k), got " + s.ToString());
  }
  if (static_cast<int>(labels.size()) != s.n) {
    Fail(ErrorCode::kShapeMismatch, "label count does not match batch size");
  }
  for (int label : labels) {
    if (label < 0 || label >= s.c) {
      Fail(ErrorCode::kInvalidArgument,
           "label " + std::to_string(label) + " outside [0, " +
               std::to_string(s.c) + ")");
    }
  }
}

}  // namespace

double SoftmaxCrossEntropy(const Tensor& logits, std::span<const int> labels) {
  CheckLogits(logits, labels);
  const Shape& s = logits.shape();
  double total = 0.0;
  for (int n = 0; n < s.n; ++n) {
    const double* z = logits.data().data() + static_cast<std::size_t>(n) * s.c;
    const double m = *std::max_element(z, z + s.c);
    double sum = 0.0;
    for (int k = 0; k < s.c; ++k) sum += std::exp(z[k] - m);
    total += m + std::log(sum) - z[labels[n]];
  }
  return total / s.n;
}

Tensor SoftmaxCrossEntropyGrad(const Tensor& logits,
                               std::span<const int> labels) {
  CheckLogits(logits, labels);
  const Shape& s = logits.shape();
  Tensor grad(s);
  for (int n = 0; n < s.n; ++n) {
    const double* z = logits.data().data() + static_cast<std::size_t>(n) * s.c;
    double* g = grad.data().data() + static_cast<std::size_t>(n) * s.c;
    const double m = *std::max_element(z, z + s.c);
    double sum = 0.0;
    for (int k = 0; k < s.c; ++k) {
      g[k] = std::exp(z[k] - m);
      sum += g[k];
    }
    for (int k = 0; k < s.c; ++k) g[k] = g[k] / sum / s.n;
    g[labels[n]] -= 1.0 / s.n;
  }
  return grad;
}

}  // namespace evonorm
