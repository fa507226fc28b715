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


// Reference implementations for the tests: direct nested loops over the
// NHWC layout, and closed forms of every zoo layer written out by hand. They
// share no code with the library beyond the Tensor container.

#ifndef EVONORM_TESTS_ORACLES_HPP_
#define EVONORM_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "layer.hpp"
#include "tensor.hpp"

namespace oracle {

using evonorm::Axes;
using evonorm::Shape;
using evonorm::Tensor;

inline constexpr double kEps = 1e-5;

inline double Sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }
inline double Sign(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }
inline double SignedLog(double v) { return Sign(v) * std::log(std::abs(v) + kEps); }
inline double SignedSqrt(double v) { return Sign(v) * std::sqrt(std::abs(v)); }

inline Tensor RandomTensor(const Shape& shape, std::mt19937_64& rng, double lo = -2.0,
                           double hi = 2.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Tensor t(shape);
  for (double& v : t.data()) v = dist(rng);
  return t;
}

inline Tensor Map(const Tensor& x, const std::function<double(double)>& f) {
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return out;
}

// Element (n,h,w,c) of an operand that is either full-size or a channel
// vector.
inline double At(const Tensor& t, int n, int h, int w, int c) {
  return t.is_channel_vector() ? t.at(0, 0, 0, c) : t.at(n, h, w, c);
}

inline Tensor Zip(const Tensor& a, const Tensor& b, const std::function<double(double, double)>& f) {
  const Shape s = a.is_channel_vector() ? b.shape() : a.shape();
  Tensor out(s);
  for (int n = 0; n < s.n; ++n)
    for (int h = 0; h < s.h; ++h)
      for (int w = 0; w < s.w; ++w)
        for (int c = 0; c < s.c; ++c)
          out.at(n, h, w, c) = f(At(a, n, h, w, c), At(b, n, h, w, c));
  return out;
}

// Whether (n1,c1) and (n2,c2) share an aggregation cell.
inline bool SameCell(Axes axes, int groups, int channels, int n1, int c1, int n2, int c2) {
  switch (axes) {
    case Axes::kBWH: return c1 == c2;
    case Axes::kWHC: return n1 == n2;
    case Axes::kWH: return n1 == n2 && c1 == c2;
    case Axes::kWHCg: {
      const int per = channels / groups;
      return n1 == n2 && c1 / per == c2 / per;
    }
  }
  return false;
}

enum class Stat { kMean, kRms, kStd };

// Brute force: for every element, scan the whole tensor for its cell mates.
inline Tensor Moment(Stat stat, Axes axes, int groups, const Tensor& x, double eps = kEps) {
  const Shape s = x.shape();
  if (axes == Axes::kWHCg && s.c % groups != 0) throw std::invalid_argument("groups");
  Tensor out(s);
  for (int n = 0; n < s.n; ++n)
    for (int h = 0; h < s.h; ++h)
      for (int w = 0; w < s.w; ++w)
        for (int c = 0; c < s.c; ++c) {
          double sum = 0.0, sum_sq = 0.0;
          long count = 0;
          for (int n2 = 0; n2 < s.n; ++n2)
            for (int h2 = 0; h2 < s.h; ++h2)
              for (int w2 = 0; w2 < s.w; ++w2)
                for (int c2 = 0; c2 < s.c; ++c2) {
                  if (!SameCell(axes, groups, s.c, n, c, n2, c2)) continue;
                  const double v = x.at(n2, h2, w2, c2);
                  sum += v;
                  sum_sq += v * v;
                  ++count;
                }
          const double mean = sum / count;
          double value = mean;
          if (stat == Stat::kRms) value = std::sqrt(sum_sq / count + eps);
          if (stat == Stat::kStd) {
            double dev = 0.0;
            for (int n2 = 0; n2 < s.n; ++n2)
              for (int h2 = 0; h2 < s.h; ++h2)
                for (int w2 = 0; w2 < s.w; ++w2)
                  for (int c2 = 0; c2 < s.c; ++c2) {
                    if (!SameCell(axes, groups, s.c, n, c, n2, c2)) continue;
                    const double d = x.at(n2, h2, w2, c2) - mean;
                    dev += d * d;
                  }
            value = std::sqrt(dev / count + eps);
          }
          out.at(n, h, w, c) = value;
        }
  return out;
}

// Cross-correlation with "same" (ceil(dim / stride) outputs, extra padding
// at the bottom/right) or "valid" padding.
inline Tensor Conv2D(const Tensor& x, const Tensor& wt, int stride, bool same, int groups) {
  const Shape xs = x.shape();
  const int kh = wt.shape().n, kw = wt.shape().h, cin_g = wt.shape().w, cout = wt.shape().c;
  int oh, ow, pt = 0, pl = 0;
  if (same) {
    oh = (xs.h + stride - 1) / stride;
    ow = (xs.w + stride - 1) / stride;
    pt = std::max(0, (oh - 1) * stride + kh - xs.h) / 2;
    pl = std::max(0, (ow - 1) * stride + kw - xs.w) / 2;
  } else {
    oh = (xs.h - kh) / stride + 1;
    ow = (xs.w - kw) / stride + 1;
  }
  const int cout_g = cout / groups;
  Tensor out(Shape{xs.n, oh, ow, cout});
  for (int n = 0; n < xs.n; ++n)
    for (int i = 0; i < oh; ++i)
      for (int j = 0; j < ow; ++j)
        for (int o = 0; o < cout; ++o) {
          const int g = o / cout_g;
          double acc = 0.0;
          for (int a = 0; a < kh; ++a)
            for (int b = 0; b < kw; ++b)
              for (int k = 0; k < cin_g; ++k) {
                const int r = i * stride + a - pt;
                const int q = j * stride + b - pl;
                if (r < 0 || q < 0 || r >= xs.h || q >= xs.w) continue;
                acc += x.at(n, r, q, g * cin_g + k) * wt.at(a, b, k, o);
              }
          out.at(n, i, j, o) = acc;
        }
  return out;
}

inline double SoftmaxCrossEntropy(const Tensor& logits, const std::vector<int>& labels) {
  const int n = logits.shape().n, k = logits.shape().c;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double m = -INFINITY;
    for (int j = 0; j < k; ++j) m = std::max(m, logits.at(i, 0, 0, j));
    double z = 0.0;
    for (int j = 0; j < k; ++j) z += std::exp(logits.at(i, 0, 0, j) - m);
    total += m + std::log(z) - logits.at(i, 0, 0, labels[i]);
  }
  return total / n;
}

// Per-channel (b,w,h) statistic as seen by a layer: the batch value in
// training mode, or the moving average after one training update from its
// initial value (0 for means, 1 otherwise) in inference mode.
struct BatchStats {
  bool inference = false;
  double rho = evonorm::kDefaultEmaMomentum;

  Tensor operator()(Stat stat, const Tensor& x) const {
    const Tensor batch = Moment(stat, Axes::kBWH, 1, x);
    if (!inference) return batch;
    const double init = stat == Stat::kMean ? 0.0 : 1.0;
    std::vector<double> ema(x.shape().c);
    for (int c = 0; c < x.shape().c; ++c) ema[c] = rho * init + (1.0 - rho) * batch.at(0, 0, 0, c);
    Tensor out(x.shape());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = ema[i % x.shape().c];
    return out;
  }
};

// Hand-written formula of zoo layer `name`. Inference mode expects the
// layer's moving averages to have seen exactly one training batch, `x`.
inline Tensor ZooClosedForm(const std::string& name, const Tensor& x,
                            const evonorm::LayerParams& p, int groups, bool inference,
                            double rho = evonorm::kDefaultEmaMomentum) {
  const BatchStats bwh{inference, rho};
  auto whcg = [&](Stat s) { return Moment(s, Axes::kWHCg, groups, x); };
  auto wh = [&](Stat s) { return Moment(s, Axes::kWH, 1, x); };
  auto whc = [&](Stat s) { return Moment(s, Axes::kWHC, 1, x); };
  const Shape s = x.shape();
  auto each = [&](const std::function<double(int n, int h, int w, int c, double xv)>& f) {
    Tensor out(s);
    for (int n = 0; n < s.n; ++n)
      for (int h = 0; h < s.h; ++h)
        for (int w = 0; w < s.w; ++w)
          for (int c = 0; c < s.c; ++c) out.at(n, h, w, c) = f(n, h, w, c, x.at(n, h, w, c));
    return out;
  };
  auto g = [&](int c) { return p.gamma.at(0, 0, 0, c); };
  auto b = [&](int c) { return p.beta.at(0, 0, 0, c); };
  auto v0 = [&](int c) { return p.v0.at(0, 0, 0, c); };
  auto v1 = [&](int c) { return p.v1.at(0, 0, 0, c); };

  auto normalize_act = [&](const Tensor& mu, const Tensor& sd, bool silu) {
    return each([&](int n, int h, int w, int c, double xv) {
      const double z = (xv - mu.at(n, h, w, c)) / sd.at(n, h, w, c) * g(c) + b(c);
      return silu ? z * Sigmoid(v1(c) * z) : std::max(z, 0.0);
    });
  };
  // x / max(s_bwh(x), other(x)) * gamma + beta
  auto b_form = [&](const std::function<double(int, int, int, int, double)>& other) {
    const Tensor sb = bwh(Stat::kStd, x);
    return each([&](int n, int h, int w, int c, double xv) {
      return xv / std::max(sb.at(n, h, w, c), other(n, h, w, c, xv)) * g(c) + b(c);
    });
  };
  // x * act(x) / den(x) * gamma + beta
  auto s_form = [&](const Tensor& den, const std::function<double(int, double)>& act) {
    return each([&](int n, int h, int w, int c, double xv) {
      return xv * act(c, xv) / den.at(n, h, w, c) * g(c) + b(c);
    });
  };
  auto sig = [](int, double v) { return Sigmoid(v); };
  auto sig_v1 = [&](int c, double v) { return Sigmoid(v1(c) * v); };

  if (name == "bn_relu") return normalize_act(bwh(Stat::kMean, x), bwh(Stat::kStd, x), false);
  if (name == "bn_silu") return normalize_act(bwh(Stat::kMean, x), bwh(Stat::kStd, x), true);
  if (name == "gn_relu") return normalize_act(whcg(Stat::kMean), whcg(Stat::kStd), false);
  if (name == "gn_silu") return normalize_act(whcg(Stat::kMean), whcg(Stat::kStd), true);
  if (name == "ln_relu") return normalize_act(whc(Stat::kMean), whc(Stat::kStd), false);
  if (name == "frn") {
    const Tensor r = wh(Stat::kRms);
    return each([&](int n, int h, int w, int c, double xv) {
      return std::max(xv / r.at(n, h, w, c) * g(c) + b(c), v0(c));
    });
  }
  if (name == "random_table3") {
    const Tensor z = Moment(Stat::kStd, Axes::kWH, 1,
                            Map(x, [](double v) { return Sigmoid(std::abs(v)); }));
    return each([&](int n, int h, int w, int c, double) {
      return SignedSqrt(z.at(n, h, w, c)) * g(c) + b(c);
    });
  }
  if (name == "rs_rej_table3") {
    const Tensor r = bwh(Stat::kRms, x);
    return each([&](int n, int h, int w, int c, double xv) {
      return std::max(xv, 0.0) / r.at(n, h, w, c) * g(c) + b(c);
    });
  }
  const Tensor s_wh = wh(Stat::kStd);
  const Tensor rms_wh = wh(Stat::kRms);
  const Tensor rms_whc = whc(Stat::kRms);
  if (name == "evonorm_b0" || name == "b_cand_06") {
    return b_form([&](int n, int h, int w, int c, double xv) {
      return v1(c) * xv + s_wh.at(n, h, w, c);
    });
  }
  if (name == "evonorm_b1" || name == "b_cand_01") {
    return b_form([&](int n, int h, int w, int c, double xv) {
      return (xv + v1(c)) * rms_wh.at(n, h, w, c);
    });
  }
  if (name == "evonorm_b2" || name == "b_cand_07") {
    return b_form([&](int n, int h, int w, int c, double xv) {
      return rms_wh.at(n, h, w, c) - xv;
    });
  }
  if (name == "b0_ablation_no_v1x") {
    return b_form([&](int n, int h, int w, int c, double) { return s_wh.at(n, h, w, c); });
  }
  if (name == "b0_ablation_no_local") {
    const Tensor sb = bwh(Stat::kStd, x);
    return each([&](int n, int h, int w, int c, double xv) {
      return xv / sb.at(n, h, w, c) * g(c) + b(c);
    });
  }
  if (name == "b0_ablation_no_global") {
    return each([&](int n, int h, int w, int c, double xv) {
      return xv / (v1(c) * xv + s_wh.at(n, h, w, c)) * g(c) + b(c);
    });
  }
  if (name == "b0_ablation_add") {
    const Tensor sb = bwh(Stat::kStd, x);
    return each([&](int n, int h, int w, int c, double xv) {
      return xv / (sb.at(n, h, w, c) + v1(c) * xv + s_wh.at(n, h, w, c)) * g(c) + b(c);
    });
  }
  if (name == "b_cand_02") {
    return b_form([&](int n, int h, int w, int c, double xv) {
      return xv + rms_whc.at(n, h, w, c);
    });
  }
  if (name == "b_cand_03") {
    const Tensor sb = bwh(Stat::kStd, x);
    return each([&](int n, int h, int w, int c, double xv) {
      return -xv * Sigmoid(xv) / sb.at(n, h, w, c) * g(c) + b(c);
    });
  }
  if (name == "b_cand_04" || name == "b_cand_08") {
    return b_form([&](int n, int h, int w, int c, double xv) {
      return xv * rms_wh.at(n, h, w, c);
    });
  }
  if (name == "b_cand_05") {
    return b_form([&](int n, int h, int w, int c, double xv) {
      return rms_whc.at(n, h, w, c) - xv;
    });
  }
  if (name == "b_cand_09" || name == "b_cand_10") {
    return b_form([&](int n, int h, int w, int c, double xv) {
      return xv + s_wh.at(n, h, w, c);
    });
  }
  const Tensor s_g = whcg(Stat::kStd);
  const Tensor rms_g = whcg(Stat::kRms);
  if (name == "evonorm_s0" || name == "s_cand_06") return s_form(s_g, sig_v1);
  if (name == "evonorm_s1" || name == "s_cand_05" || name == "s_cand_07" ||
      name == "s_cand_09") {
    return s_form(s_g, sig);
  }
  if (name == "evonorm_s2" || name == "s_cand_02" || name == "s_cand_03" ||
      name == "s_cand_04" || name == "s_cand_08") {
    return s_form(rms_g, sig);
  }
  if (name == "s_cand_01") {
    return s_form(rms_g, [](int, double v) { return std::tanh(Sigmoid(v)); });
  }
  if (name == "s_cand_10") {
    return each([&](int n, int h, int w, int c, double xv) {
      const double u = xv / rms_g.at(n, h, w, c);
      return u * Sigmoid(std::max(xv, u)) * g(c) + b(c);
    });
  }
  throw std::invalid_argument("no closed form for " + name);
}

}  // namespace oracle

#endif  // EVONORM_TESTS_ORACLES_HPP_
