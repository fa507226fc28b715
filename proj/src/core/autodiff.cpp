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

#include "autodiff.hpp"

#include <algorithm>
#include <cmath>

#include "error.hpp"

namespace evonorm::ad {

Var Tape::Variable(Tensor value) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = true;
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::Constant(Tensor value) {
  Node node;
  node.value = std::move(value);
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Tape::Record(Tensor value, std::span<const Var> inputs, BackwardFn fn,
                 double kink_margin) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = std::any_of(inputs.begin(), inputs.end(), [&](Var v) {
    return nodes_[v.index].requires_grad;
  });
  if (node.requires_grad) node.backward = std::move(fn);
  min_kink_margin_ = std::min(min_kink_margin_, kink_margin);
  nodes_.push_back(std::move(node));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Tensor Tape::grad(Var v) const {
  const Node& node = nodes_[v.index];
  return node.has_grad ? node.grad : Tensor(node.value.shape());
}

void Tape::Accumulate(Var v, const Tensor& g) {
  Node& node = nodes_[v.index];
  if (!node.requires_grad) return;
  if (!node.has_grad) {
    node.grad = g;
    node.has_grad = true;
    return;
  }
  auto dst = node.grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::Accumulate(Var v, Tensor&& g) {
  Node& node = nodes_[v.index];
  if (!node.requires_grad) return;
  if (!node.has_grad) {
    node.grad = std::move(g);
    node.has_grad = true;
    return;
  }
  auto dst = node.grad.data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::Backward(Var loss) {
  if (swept_) Fail(ErrorCode::kInternal, "Tape::Backward called twice");
  swept_ = true;
  if (nodes_[loss.index].value.size() != 1) {
    Fail(ErrorCode::kInvalidArgument, "Backward needs a scalar loss");
  }
  Accumulate(loss, Tensor(nodes_[loss.index].value.shape(), 1.0));
  for (std::int64_t i = loss.index; i >= 0; --i) {
    Node& node = nodes_[i];
    if (!node.has_grad || !node.backward) continue;
    node.backward(*this, node.grad);
    // Interior gradients are no longer needed once propagated.
    if (i != static_cast<std::int64_t>(loss.index)) node.backward = nullptr;
  }
}

namespace {

double UnaryDerivative(Primitive kind, double x, double y) {
  switch (kind) {
    case Primitive::kNeg: return -1.0;
    case Primitive::kSigmoid: return y * (1.0 - y);
    case Primitive::kTanh: return 1.0 - y * y;
    case Primitive::kExp: return y;
    case Primitive::kLog: return 1.0 / (std::abs(x) + kMomentEpsilon);
    case Primitive::kAbs: return static_cast<double>((x > 0) - (x < 0));
    case Primitive::kSquare: return 2.0 * x;
    case Primitive::kSqrt:
      return 0.5 / std::max(std::sqrt(std::abs(x)), kMomentEpsilon);
    default: return 0.0;
  }
}

bool HasKinkAtZero(Primitive kind) {
  return kind == Primitive::kAbs || kind == Primitive::kSqrt ||
         kind == Primitive::kLog;
}

// Sums a full-size gradient down to `target` when the input was a
// broadcast channel vector.
Tensor ReduceTo(Tensor full, const Shape& target) {
  if (full.shape() == target) return full;
  Tensor out(target);
  const std::size_t c = target.c;
  const double* src = full.data().data();
  double* dst = out.data().data();
  for (std::size_t base = 0; base < full.size(); base += c) {
    for (std::size_t k = 0; k < c; ++k) dst[k] += src[base + k];
  }
  return out;
}

}  // namespace

Var Unary(Tape& tape, Primitive kind, Var x) {
  Tensor y = EvalUnary(kind, tape.value(x));
  double margin = std::numeric_limits<double>::infinity();
  if (HasKinkAtZero(kind)) {
    for (double v : tape.value(x).data()) margin = std::min(margin, std::abs(v));
  }
  const Var inputs[] = {x};
  const auto self = static_cast<std::uint32_t>(tape.size());
  return tape.Record(
      std::move(y), inputs,
      [kind, x, self](Tape& t, const Tensor& g) {
        const Tensor& xv = t.value(x);
        const Tensor& yv = t.value(Var{self});
        Tensor dx(xv.shape());
        auto d = dx.data();
        for (std::size_t i = 0; i < d.size(); ++i) {
          d[i] = g[i] * UnaryDerivative(kind, xv[i], yv[i]);
        }
        t.Accumulate(x, std::move(dx));
      },
      margin);
}

Var Binary(Tape& tape, Primitive kind, Var x, Var y) {
  const Tensor& xv = tape.value(x);
  const Tensor& yv = tape.value(y);
  Tensor out = EvalBinary(kind, xv, yv);
  double margin = std::numeric_limits<double>::infinity();
  if (kind == Primitive::kMax) {
    ForEachBroadcast(out.size(), out.channels(), xv.size() == out.size(),
                     yv.size() == out.size(),
                     [&](std::size_t, std::size_t a, std::size_t b) {
                       margin = std::min(margin, std::abs(xv[a] - yv[b]));
                     });
  }
  if (kind == Primitive::kDiv) {
    for (double v : yv.data()) margin = std::min(margin, std::abs(v));
  }
  const Var inputs[] = {x, y};
  const Shape out_shape = out.shape();
  return tape.Record(
      std::move(out), inputs,
      [kind, x, y, out_shape](Tape& t, const Tensor& g) {
        const Tensor& a = t.value(x);
        const Tensor& b = t.value(y);
        const std::size_t size = out_shape.size();
        const bool a_full = a.size() == size;
        const bool b_full = b.size() == size;
        const std::size_t c = out_shape.c;
        const bool need_a = t.requires_grad(x);
        const bool need_b = t.requires_grad(y);
        const double* gp = g.data().data();
        const double* ap = a.data().data();
        const double* bp = b.data().data();
        // Gradients are accumulated straight into operand-shaped buffers.
        Tensor da(need_a ? a.shape() : Shape{});
        Tensor db(need_b ? b.shape() : Shape{});
        double* dap = da.data().data();
        double* dbp = db.data().data();
        auto run = [&](auto fa, auto fb) {
          ForEachBroadcast(size, c, a_full, b_full,
                           [&](std::size_t i, std::size_t ia, std::size_t ib) {
                             if (need_a) dap[ia] += fa(gp[i], ap[ia], bp[ib]);
                             if (need_b) dbp[ib] += fb(gp[i], ap[ia], bp[ib]);
                           });
        };
        switch (kind) {
          case Primitive::kAdd:
            run([](double gi, double, double) { return gi; },
                [](double gi, double, double) { return gi; });
            break;
          case Primitive::kMul:
            run([](double gi, double, double bv) { return gi * bv; },
                [](double gi, double av, double) { return gi * av; });
            break;
          case Primitive::kDiv:
            run([](double gi, double, double bv) { return gi / bv; },
                [](double gi, double av, double bv) { return -gi * av / (bv * bv); });
            break;
          case Primitive::kMax:
            // Ties route to the first input, matching the forward pass.
            run([](double gi, double av, double bv) {
                  return (av >= bv || std::isnan(av)) ? gi : 0.0;
                },
                [](double gi, double av, double bv) {
                  return (av >= bv || std::isnan(av)) ? 0.0 : gi;
                });
            break;
          default:
            break;
        }
        if (need_a) t.Accumulate(x, std::move(da));
        if (need_b) t.Accumulate(y, std::move(db));
      },
      margin);
}

Var Moment(Tape& tape, Primitive kind, IndexSet index, Var x) {
  const Tensor& xv = tape.value(x);
  const CellMap cells(xv.shape(), index);
  std::vector<double> stat = CellStatistic(kind, cells, xv);
  Tensor out = Spread(cells, stat, xv.shape());
  const Var inputs[] = {x};
  return tape.Record(
      std::move(out), inputs,
      [kind, index, x, stat = std::move(stat)](Tape& t, const Tensor& g) {
        const Tensor& xv = t.value(x);
        const Shape& s = xv.shape();
        const CellMap cells(s, index);
        std::vector<double> gsum = CellMean(cells, g);
        for (double& v : gsum) v *= cells.cell_size();
        Tensor dx(s);
        const int hw = s.h * s.w;
        const double inv_size = 1.0 / cells.cell_size();
        std::vector<double> mean;
        if (kind == Primitive::kStdMoment) mean = CellMean(cells, xv);
        std::size_t i = 0;
        for (int n = 0; n < s.n; ++n) {
          for (int p = 0; p < hw; ++p) {
            for (int c = 0; c < s.c; ++c, ++i) {
              const int cell = cells.Cell(n, c);
              switch (kind) {
                case Primitive::kMean:
                  dx[i] = gsum[cell] * inv_size;
                  break;
                case Primitive::kRmsMoment:
                  dx[i] = xv[i] * gsum[cell] * inv_size / stat[cell];
                  break;
                case Primitive::kStdMoment:
                  dx[i] = (xv[i] - mean[cell]) * gsum[cell] * inv_size / stat[cell];
                  break;
                default:
                  break;
              }
            }
          }
        }
        t.Accumulate(x, std::move(dx));
      });
}

Var Apply(Tape& tape, Primitive kind, IndexSet index,
          std::span<const Var> inputs) {
  if (static_cast<int>(inputs.size()) != Arity(kind)) {
    Fail(ErrorCode::kInvalidArgument,
         std::string("wrong number of inputs for ") + PrimitiveName(kind));
  }
  if (IsMoment(kind)) return Moment(tape, kind, index, inputs[0]);
  if (Arity(kind) == 2) return Binary(tape, kind, inputs[0], inputs[1]);
  return Unary(tape, kind, inputs[0]);
}

Var BroadcastChannels(Tape& tape, Var v, const Shape& shape) {
  const Tensor& vv = tape.value(v);
  if (!vv.is_channel_vector() || vv.channels() != shape.c) {
    Fail(ErrorCode::kShapeMismatch, "cannot broadcast " +
                                        vv.shape().ToString() + " to " +
                                        shape.ToString());
  }
  Tensor out(shape);
  auto d = out.data();
  const std::size_t c = shape.c;
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = vv[i % c];
  const Var inputs[] = {v};
  const Shape vs = vv.shape();
  return tape.Record(std::move(out), inputs,
                     [v, vs](Tape& t, const Tensor& g) {
                       t.Accumulate(v, ReduceTo(g, vs));
                     });
}

Var Conv2D(Tape& tape, Var x, Var weights, int stride, Padding padding,
           int groups) {
  Tensor out = evonorm::Conv2D(tape.value(x), tape.value(weights), stride,
                               padding, groups);
  const Var inputs[] = {x, weights};
  return tape.Record(
      std::move(out), inputs,
      [x, weights, stride, padding, groups](Tape& t, const Tensor& g) {
        const bool need_x = t.requires_grad(x);
        const bool need_w = t.requires_grad(weights);
        Tensor gx, gw;
        Conv2DBackward(t.value(x), t.value(weights), stride, padding, groups,
                       g, need_x ? &gx : nullptr, need_w ? &gw : nullptr);
        if (need_x) t.Accumulate(x, std::move(gx));
        if (need_w) t.Accumulate(weights, std::move(gw));
      });
}

Var GlobalAvgPool(Tape& tape, Var x) {
  Tensor out = evonorm::GlobalAvgPool(tape.value(x));
  const Var inputs[] = {x};
  return tape.Record(std::move(out), inputs, [x](Tape& t, const Tensor& g) {
    const Shape& s = t.value(x).shape();
    Tensor dx(s);
    const double scale = 1.0 / (s.h * s.w);
    double* p = dx.data().data();
    for (int n = 0; n < s.n; ++n) {
      const double* gn = g.data().data() + static_cast<std::size_t>(n) * s.c;
      for (int i = 0; i < s.h * s.w; ++i) {
        for (int c = 0; c < s.c; ++c) *p++ = gn[c] * scale;
      }
    }
    t.Accumulate(x, std::move(dx));
  });
}

Var Dense(Tape& tape, Var x, Var weights, Var bias) {
  Tensor out =
      evonorm::Dense(tape.value(x), tape.value(weights), tape.value(bias));
  const Var inputs[] = {x, weights, bias};
  return tape.Record(
      std::move(out), inputs, [x, weights, bias](Tape& t, const Tensor& g) {
        const Tensor& xv = t.value(x);
        const Tensor& wv = t.value(weights);
        const int n_rows = xv.shape().n;
        const int cin = wv.shape().w;
        const int cout = wv.shape().c;
        Tensor dx(xv.shape()), dw(wv.shape()), db(t.value(bias).shape());
        for (int n = 0; n < n_rows; ++n) {
          const double* gr = g.data().data() + static_cast<std::size_t>(n) * cout;
          for (int co = 0; co < cout; ++co) db[co] += gr[co];
          for (int ci = 0; ci < cin; ++ci) {
            const double xv_i = xv[static_cast<std::size_t>(n) * cin + ci];
            const double* wr = wv.data().data() + static_cast<std::size_t>(ci) * cout;
            double* dwr = dw.data().data() + static_cast<std::size_t>(ci) * cout;
            double acc = 0.0;
            for (int co = 0; co < cout; ++co) {
              acc += gr[co] * wr[co];
              dwr[co] += xv_i * gr[co];
            }
            dx[static_cast<std::size_t>(n) * cin + ci] = acc;
          }
        }
        t.Accumulate(x, std::move(dx));
        t.Accumulate(weights, std::move(dw));
        t.Accumulate(bias, std::move(db));
      });
}

Var SoftmaxCrossEntropy(Tape& tape, Var logits, std::vector<int> labels) {
  const double loss = evonorm::SoftmaxCrossEntropy(tape.value(logits), labels);
  const Var inputs[] = {logits};
  return tape.Record(
      Tensor::Scalar(loss), inputs,
      [logits, labels = std::move(labels)](Tape& t, const Tensor& g) {
        Tensor d = SoftmaxCrossEntropyGrad(t.value(logits), labels);
        for (double& v : d.data()) v *= g[0];
        t.Accumulate(logits, std::move(d));
      });
}

Var Sum(Tape& tape, Var x) {
  double total = 0.0;
  for (double v : tape.value(x).data()) total += v;
  const Var inputs[] = {x};
  return tape.Record(Tensor::Scalar(total), inputs,
                     [x](Tape& t, const Tensor& g) {
                       t.Accumulate(x, Tensor(t.value(x).shape(), g[0]));
                     });
}

Var WeightedSum(Tape& tape, Var x, Tensor weights) {
  const Tensor& xv = tape.value(x);
  if (weights.shape() != xv.shape()) {
    Fail(ErrorCode::kShapeMismatch, "WeightedSum weights shape mismatch");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < xv.size(); ++i) total += xv[i] * weights[i];
  const Var inputs[] = {x};
  return tape.Record(Tensor::Scalar(total), inputs,
                     [x, w = std::move(weights)](Tape& t, const Tensor& g) {
                       Tensor d = w;
                       for (double& v : d.data()) v *= g[0];
                       t.Accumulate(x, std::move(d));
                     });
}

}  // namespace evonorm::ad
