// Copyright 2026 The bgop Authors
// SPDX-License-Identifier: Apache-2.0
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

#include "bgop/ops.hpp"

#include <algorithm>
#include <cmath>

#include "bgop/error.hpp"

namespace bgop::ops {
namespace {

constexpr float kGdnFloor = 1e-6f;

std::span<const float> cdata(const Tensor& t) { return t.data(); }

// Parent gradient buffer, or an empty span when that parent needs no gradient.
std::span<float> grad_of(ag::Node& self, std::size_t i) {
  ag::Node& p = *self.parents[i];
  if (!p.requires_grad) return {};
  return p.grad_buffer().data();
}

const Tensor& value_of(ag::Node& self, std::size_t i) { return self.parents[i]->value; }

inline float softplus_scalar(float x) { return x > 20.0f ? x : std::log1p(std::exp(x)); }
inline float sigmoid_scalar(float x) { return 1.0f / (1.0f + std::exp(-x)); }

template <class Fn>
Var unary_map(const Var& x, Fn&& forward, std::function<void(ag::Node&)> back) {
  Tensor y(x.shape());
  auto xs = x.value().data();
  auto ys = y.data();
  for (std::size_t i = 0; i < ys.size(); ++i) ys[i] = forward(xs[i]);
  return ag::make_result(std::move(y), {x}, std::move(back));
}

}  // namespace

Var conv2d(const Var& x, const Var& weight, const Var& bias, ConvGeometry g) {
  const Shape ys = kernels::conv2d_output_shape(x.shape(), weight.shape(), g);
  Tensor y(ys);
  std::span<const float> b = bias.defined() ? cdata(bias.value()) : std::span<const float>{};
  kernels::conv2d_forward<float>(cdata(x.value()), x.shape(), cdata(weight.value()),
                                 weight.shape(), b, g, y.data(), ys);
  std::vector<Var> parents{x, weight};
  if (bias.defined()) parents.push_back(bias);
  const bool has_bias = bias.defined();
  return ag::make_result(std::move(y), std::move(parents), [g, has_bias](ag::Node& self) {
    const Tensor& xv = value_of(self, 0);
    const Tensor& wv = value_of(self, 1);
    kernels::conv2d_backward<float>(cdata(xv), xv.shape(), cdata(wv), wv.shape(), g,
                                    cdata(self.grad), self.value.shape(), grad_of(self, 0),
                                    grad_of(self, 1),
                                    has_bias ? grad_of(self, 2) : std::span<float>{});
  });
}

Var conv_transpose2d(const Var& x, const Var& weight, const Var& bias, ConvGeometry g) {
  const Shape ys = kernels::conv_transpose2d_output_shape(x.shape(), weight.shape(), g);
  Tensor y(ys);
  std::span<const float> b = bias.defined() ? cdata(bias.value()) : std::span<const float>{};
  kernels::conv_transpose2d_forward<float>(cdata(x.value()), x.shape(), cdata(weight.value()),
                                           weight.shape(), b, g, y.data(), ys);
  std::vector<Var> parents{x, weight};
  if (bias.defined()) parents.push_back(bias);
  const bool has_bias = bias.defined();
  return ag::make_result(std::move(y), std::move(parents), [g, has_bias](ag::Node& self) {
    const Tensor& xv = value_of(self, 0);
    const Tensor& wv = value_of(self, 1);
    kernels::conv_transpose2d_backward<float>(cdata(xv), xv.shape(), cdata(wv), wv.shape(), g,
                                              cdata(self.grad), self.value.shape(),
                                              grad_of(self, 0), grad_of(self, 1),
                                              has_bias ? grad_of(self, 2) : std::span<float>{});
  });
}

Tensor gdn_effective(const Tensor& raw) {
  Tensor out(raw.shape());
  for (std::size_t i = 0; i < raw.numel(); ++i) out[i] = kGdnFloor + softplus_scalar(raw[i]);
  return out;
}

float gdn_raw_from_effective(float effective) {
  const float v = std::max(effective - kGdnFloor, 1e-12f);
  return v > 20.0f ? v : std::log(std::expm1(v));
}

Var gdn(const Var& x, const Var& beta_raw, const Var& gamma_raw, bool inverse) {
  const int c = x.shape().c;
  if (static_cast<int>(beta_raw.value().numel()) != c ||
      static_cast<int>(gamma_raw.value().numel()) != c * c) {
    throw ShapeError("gdn parameters do not match " + std::to_string(c) + " channels");
  }
  Tensor beta = gdn_effective(beta_raw.value());
  Tensor gamma = gdn_effective(gamma_raw.value());
  Tensor y(x.shape());
  kernels::gdn_forward<float>(cdata(x.value()), x.shape(), cdata(beta), cdata(gamma), inverse,
                              y.data());
  return ag::make_result(
      std::move(y), {x, beta_raw, gamma_raw},
      [beta = std::move(beta), gamma = std::move(gamma), inverse](ag::Node& self) {
        const Tensor& xv = value_of(self, 0);
        const bool want_params = self.parents[1]->requires_grad || self.parents[2]->requires_grad;
        Tensor gbeta(beta.shape(), 0.0f), ggamma(gamma.shape(), 0.0f);
        kernels::gdn_backward<float>(cdata(xv), xv.shape(), cdata(beta), cdata(gamma), inverse,
                                     cdata(self.grad), grad_of(self, 0),
                                     want_params ? gbeta.data() : std::span<float>{},
                                     want_params ? ggamma.data() : std::span<float>{});
        if (!want_params) return;
        // d effective / d raw = sigmoid(raw)
        auto chain = [](std::span<float> dst, const Tensor& g, const Tensor& raw) {
          if (dst.empty()) return;
          for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * sigmoid_scalar(raw[i]);
        };
        chain(grad_of(self, 1), gbeta, value_of(self, 1));
        chain(grad_of(self, 2), ggamma, value_of(self, 2));
      });
}

Var relu(const Var& x) {
  return unary_map(x, [](float v) { return v > 0.0f ? v : 0.0f; }, [](ag::Node& self) {
    auto gx = grad_of(self, 0);
    const auto xv = cdata(value_of(self, 0));
    for (std::size_t i = 0; i < gx.size(); ++i) {
      if (xv[i] > 0.0f) gx[i] += self.grad[i];
    }
  });
}

Var leaky_relu(const Var& x, float slope) {
  return unary_map(
      x, [slope](float v) { return v > 0.0f ? v : slope * v; },
      [slope](ag::Node& self) {
        auto gx = grad_of(self, 0);
        const auto xv = cdata(value_of(self, 0));
        for (std::size_t i = 0; i < gx.size(); ++i) {
          gx[i] += (xv[i] > 0.0f ? 1.0f : slope) * self.grad[i];
        }
      });
}

Var sigmoid(const Var& x) {
  return unary_map(x, sigmoid_scalar, [](ag::Node& self) {
    auto gx = grad_of(self, 0);
    for (std::size_t i = 0; i < gx.size(); ++i) {
      const float s = self.value[i];
      gx[i] += self.grad[i] * s * (1.0f - s);
    }
  });
}

Var softplus(const Var& x, float floor) {
  return unary_map(
      x, [floor](float v) { return floor + softplus_scalar(v); },
      [](ag::Node& self) {
        auto gx = grad_of(self, 0);
        const auto xv = cdata(value_of(self, 0));
        for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i] * sigmoid_scalar(xv[i]);
      });
}

Var add(const Var& a, const Var& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] + b.value()[i];
  return ag::make_result(std::move(y), {a, b}, [](ag::Node& self) {
    for (std::size_t p = 0; p < 2; ++p) {
      auto g = grad_of(self, p);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a.shape(), b.shape(), "sub");
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] - b.value()[i];
  return ag::make_result(std::move(y), {a, b}, [](ag::Node& self) {
    auto ga = grad_of(self, 0);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
    auto gb = grad_of(self, 1);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= self.grad[i];
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a.shape(), b.shape(), "mul");
  Tensor y(a.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = a.value()[i] * b.value()[i];
  return ag::make_result(std::move(y), {a, b}, [](ag::Node& self) {
    const Tensor& av = value_of(self, 0);
    const Tensor& bv = value_of(self, 1);
    auto ga = grad_of(self, 0);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i] * bv[i];
    auto gb = grad_of(self, 1);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += self.grad[i] * av[i];
  });
}

Var scale(const Var& x, float s) {
  return unary_map(x, [s](float v) { return s * v; }, [s](ag::Node& self) {
    auto gx = grad_of(self, 0);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += s * self.grad[i];
  });
}

Var add_constant(const Var& x, const Tensor& c) {
  require_same_shape(x.shape(), c.shape(), "add_constant");
  Tensor y(x.shape());
  for (std::size_t i = 0; i < y.numel(); ++i) y[i] = x.value()[i] + c[i];
  return ag::make_result(std::move(y), {x}, [](ag::Node& self) {
    auto gx = grad_of(self, 0);
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += self.grad[i];
  });
}

Var concat_channels(std::span<const Var> parts) {
  std::vector<Tensor> values;
  values.reserve(parts.size());
  for (const auto& p : parts) values.push_back(p.value());
  Tensor y = bgop::concat_channels(values);
  std::vector<int> channels;
  for (const auto& p : parts) channels.push_back(p.shape().c);
  return ag::make_result(std::move(y), std::vector<Var>(parts.begin(), parts.end()),
                         [channels](ag::Node& self) {
                           const Shape& s = self.value.shape();
                           const std::size_t plane = s.plane();
                           int offset = 0;
                           for (std::size_t p = 0; p < channels.size(); ++p) {
                             auto g = grad_of(self, p);
                             if (!g.empty()) {
                               const std::size_t len = channels[p] * plane;
                               for (int n = 0; n < s.n; ++n) {
                                 const float* src =
                                     self.grad.data().data() + (n * s.c + offset) * plane;
                                 float* dst = g.data() + n * len;
                                 for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
                               }
                             }
                             offset += channels[p];
                           }
                         });
}

Var slice_channels(const Var& x, int start, int count) {
  Tensor y = x.value().slice_channels(start, count);
  return ag::make_result(std::move(y), {x}, [start, count](ag::Node& self) {
    auto g = grad_of(self, 0);
    const Shape& xs = self.parents[0]->value.shape();
    const std::size_t plane = xs.plane();
    const std::size_t len = count * plane;
    for (int n = 0; n < xs.n; ++n) {
      float* dst = g.data() + (n * xs.c + start) * plane;
      const float* src = self.grad.data().data() + n * len;
      for (std::size_t i = 0; i < len; ++i) dst[i] += src[i];
    }
  });
}

Var avg_pool2(const Var& x) {
  const Shape& xs = x.shape();
  if (xs.h % 2 != 0 || xs.w % 2 != 0) throw ShapeError("avg_pool2 needs even dims: " + xs.str());
  Tensor y(Shape{xs.n, xs.c, xs.h / 2, xs.w / 2});
  kernels::avg_pool2_forward<float>(cdata(x.value()), xs, y.data());
  return ag::make_result(std::move(y), {x}, [](ag::Node& self) {
    kernels::avg_pool2_backward<float>(self.parents[0]->value.shape(), cdata(self.grad),
                                       grad_of(self, 0));
  });
}

Var upsample2x(const Var& x) {
  const Shape& xs = x.shape();
  Tensor y(Shape{xs.n, xs.c, xs.h * 2, xs.w * 2});
  kernels::upsample2x_forward<float>(cdata(x.value()), xs, y.data());
  return ag::make_result(std::move(y), {x}, [](ag::Node& self) {
    kernels::upsample2x_backward<float>(self.parents[0]->value.shape(), cdata(self.grad),
                                        grad_of(self, 0));
  });
}

Var warp(const Var& frame, const Var& flow) {
  const Shape& fs = frame.shape();
  const Shape& vs = flow.shape();
  if (vs.c != 2 || vs.n != fs.n || vs.h != fs.h || vs.w != fs.w) {
    throw ShapeError("warp: flow " + vs.str() + " does not match frame " + fs.str());
  }
  Tensor y(fs);
  kernels::warp_forward<float>(cdata(frame.value()), fs, cdata(flow.value()), y.data());
  return ag::make_result(std::move(y), {frame, flow}, [](ag::Node& self) {
    const Tensor& fv = value_of(self, 0);
    kernels::warp_backward<float>(cdata(fv), fv.shape(), cdata(value_of(self, 1)),
                                  cdata(self.grad), grad_of(self, 0), grad_of(self, 1));
  });
}

Var fuse(const Var& a, const Var& b, const Var& mask) {
  require_same_shape(a.shape(), b.shape(), "fuse");
  const Shape& s = a.shape();
  if (!(mask.shape() == Shape{s.n, 1, s.h, s.w})) {
    throw ShapeError("fuse: mask " + mask.shape().str() + " does not match " + s.str());
  }
  Tensor y(s);
  kernels::fuse_forward<float>(cdata(a.value()), cdata(b.value()), cdata(mask.value()), s,
                               y.data());
  return ag::make_result(std::move(y), {a, b, mask}, [](ag::Node& self) {
    kernels::fuse_backward<float>(cdata(value_of(self, 0)), cdata(value_of(self, 1)),
                                  cdata(value_of(self, 2)), self.value.shape(), cdata(self.grad),
                                  grad_of(self, 0), grad_of(self, 1), grad_of(self, 2));
  });
}

Var mse(const Var& a, const Var& b) {
  require_same_shape(a.shape(), b.shape(), "mse");
  const std::size_t n = a.value().numel();
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(a.value()[i]) - b.value()[i];
    acc += d * d;
  }
  return ag::make_result(Tensor::scalar(static_cast<float>(acc / n)), {a, b}, [n](ag::Node& self) {
    const Tensor& av = value_of(self, 0);
    const Tensor& bv = value_of(self, 1);
    const float k = 2.0f * self.grad[0] / static_cast<float>(n);
    auto ga = grad_of(self, 0);
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += k * (av[i] - bv[i]);
    auto gb = grad_of(self, 1);
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= k * (av[i] - bv[i]);
  });
}

Var sum(const Var& x) {
  double acc = 0.0;
  for (float v : x.value().data()) acc += v;
  return ag::make_result(Tensor::scalar(static_cast<float>(acc)), {x}, [](ag::Node& self) {
    auto g = grad_of(self, 0);
    for (auto& v : g) v += self.grad[0];
  });
}

Var mean(const Var& x) { return scale(sum(x), 1.0f / static_cast<float>(x.value().numel())); }

Var linear_combination(std::span<const Var> terms, std::span<const float> weights) {
  if (terms.size() != weights.size()) throw ContractError("linear_combination arity mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].value().numel() != 1) throw ShapeError("linear_combination expects scalars");
    acc += static_cast<double>(weights[i]) * terms[i].value()[0];
  }
  std::vector<float> w(weights.begin(), weights.end());
  return ag::make_result(Tensor::scalar(static_cast<float>(acc)),
                         std::vector<Var>(terms.begin(), terms.end()), [w](ag::Node& self) {
                           for (std::size_t i = 0; i < w.size(); ++i) {
                             auto g = grad_of(self, i);
                             if (!g.empty()) g[0] += w[i] * self.grad[0];
                           }
                         });
}

Var laplace_rate_bits(const Var& value, const Var& mu, const Var& scale, float scale_floor,
                      double p_floor) {
  require_same_shape(value.shape(), mu.shape(), "laplace_rate_bits(mu)");
  require_same_shape(value.shape(), scale.shape(), "laplace_rate_bits(scale)");
  const std::size_t n = value.value().numel();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double b = std::max(scale.value()[i], scale_floor);
    total += kernels::laplace_bits(value.value()[i], mu.value()[i], b, p_floor).bits;
  }
  return ag::make_result(
      Tensor::scalar(static_cast<float>(total)), {value, mu, scale},
      [scale_floor, p_floor](ag::Node& self) {
        const Tensor& v = value_of(self, 0);
        const Tensor& m = value_of(self, 1);
        const Tensor& s = value_of(self, 2);
        auto gv = grad_of(self, 0);
        auto gm = grad_of(self, 1);
        auto gs = grad_of(self, 2);
        const float g = self.grad[0];
        for (std::size_t i = 0; i < v.numel(); ++i) {
          const bool clamped = s[i] < scale_floor;
          const double b = clamped ? scale_floor : s[i];
          const auto t = kernels::laplace_bits(v[i], m[i], b, p_floor);
          if (!gv.empty()) gv[i] += g * static_cast<float>(t.d_value);
          if (!gm.empty()) gm[i] += g * static_cast<float>(t.d_mu);
          if (!gs.empty() && !clamped) gs[i] += g * static_cast<float>(t.d_scale);
        }
      });
}

}  // namespace bgop::ops
