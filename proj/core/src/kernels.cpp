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

#include "bgop/kernels.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "bgop/error.hpp"

namespace bgop::kernels {
namespace {

template <class T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapMat = Eigen::Map<RowMat<T>>;
template <class T>
using MapConstMat = Eigen::Map<const RowMat<T>>;

// Output columns ox with 0 <= ox * stride - pad + kx < width.
inline void valid_columns(int width, int out_w, int stride, int offset, int& lo, int& hi) {
  // offset = kx - pad
  lo = offset >= 0 ? 0 : (-offset + stride - 1) / stride;
  hi = (width - 1 - offset) < 0 ? 0 : (width - 1 - offset) / stride + 1;
  hi = std::min(hi, out_w);
  lo = std::min(lo, hi);
}

// Unfold a (C, H, W) image into a (C*K*K, Ho*Wo) column matrix.
template <class T>
void im2col(const T* img, int channels, int height, int width, int k, int stride, int pad,
            int out_h, int out_w, T* col) {
  const int out_plane = out_h * out_w;
  for (int c = 0; c < channels; ++c) {
    const T* src = img + static_cast<std::size_t>(c) * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        T* dst = col + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * out_plane;
        const int offset = kx - pad;
        int lo, hi;
        valid_columns(width, out_w, stride, offset, lo, hi);
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          T* row = dst + oy * out_w;
          if (iy < 0 || iy >= height) {
            std::fill(row, row + out_w, T(0));
            continue;
          }
          const T* src_row = src + static_cast<std::size_t>(iy) * width + offset;
          std::fill(row, row + lo, T(0));
          if (stride == 1) {
            std::copy(src_row + lo, src_row + hi, row + lo);
          } else {
            for (int ox = lo; ox < hi; ++ox) row[ox] = src_row[ox * stride];
          }
          std::fill(row + hi, row + out_w, T(0));
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add columns back into a (C, H, W) image.
template <class T>
void col2im(const T* col, int channels, int height, int width, int k, int stride, int pad,
            int out_h, int out_w, T* img) {
  const int out_plane = out_h * out_w;
  for (int c = 0; c < channels; ++c) {
    T* dst = img + static_cast<std::size_t>(c) * height * width;
    for (int ky = 0; ky < k; ++ky) {
      for (int kx = 0; kx < k; ++kx) {
        const T* src = col + (static_cast<std::size_t>(c) * k * k + ky * k + kx) * out_plane;
        const int offset = kx - pad;
        int lo, hi;
        valid_columns(width, out_w, stride, offset, lo, hi);
        for (int oy = 0; oy < out_h; ++oy) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= height) continue;
          const T* row = src + oy * out_w;
          T* dst_row = dst + static_cast<std::size_t>(iy) * width + offset;
          if (stride == 1) {
            for (int ox = lo; ox < hi; ++ox) dst_row[ox] += row[ox];
          } else {
            for (int ox = lo; ox < hi; ++ox) dst_row[ox * stride] += row[ox];
          }
        }
      }
    }
  }
}

// Direct stride-1 "same" convolution for layers too thin for an efficient GEMM.
// Output channels are processed in tiles of kTile against 16-wide column strips.
constexpr int kTile = 8;
constexpr int kStrip = 16;

template <class T>
struct Strip;
template <>
struct Strip<float> {
  typedef float type __attribute__((vector_size(kStrip * sizeof(float))));
};
template <>
struct Strip<double> {
  typedef double type __attribute__((vector_size(kStrip * sizeof(double))));
};

bool use_direct(const Shape& xs, const Shape& ws, ConvGeometry g) {
  const int k = ws.h;
  return g.stride == 1 && k % 2 == 1 && g.pad == k / 2 && g.output_pad == 0 &&
         xs.w % kStrip == 0 && ws.n <= 16 && ws.c <= 24;
}

// y (+)= conv(x, w) for one image. `w` is (cout, cin, k, k); when `flip` it is
// read as the adjoint kernel w[ic][oc][k-1-ky][k-1-kx], mapping cin <-> cout.
template <class T>
void direct_conv_image(const T* x, int cin, int h, int width, const T* w, int cout, int k,
                       bool flip, const T* bias, bool accumulate, T* y) {
  const int p = k / 2;
  const int hp = h + 2 * p;
  const int wp = width + 2 * p;
  AlignedVector<T> xp(static_cast<std::size_t>(cin) * hp * wp, T(0));
  for (int c = 0; c < cin; ++c) {
    for (int r = 0; r < h; ++r) {
      std::copy(x + (static_cast<std::size_t>(c) * h + r) * width,
                x + (static_cast<std::size_t>(c) * h + r + 1) * width,
                xp.data() + (static_cast<std::size_t>(c) * hp + r + p) * wp + p);
    }
  }
  const int kk = k * k;
  AlignedVector<T> wt(static_cast<std::size_t>(cin) * kk * kTile);
  for (int oc0 = 0; oc0 < cout; oc0 += kTile) {
    const int nb = std::min(kTile, cout - oc0);
    std::fill(wt.begin(), wt.end(), T(0));
    for (int j = 0; j < nb; ++j) {
      const int oc = oc0 + j;
      for (int ic = 0; ic < cin; ++ic) {
        for (int t = 0; t < kk; ++t) {
          const T v = flip ? w[(static_cast<std::size_t>(ic) * cout + oc) * kk + (kk - 1 - t)]
                           : w[(static_cast<std::size_t>(oc) * cin + ic) * kk + t];
          wt[(static_cast<std::size_t>(ic) * kk + t) * kTile + j] = v;
        }
      }
    }
    for (int oy = 0; oy < h; ++oy) {
      for (int ox0 = 0; ox0 < width; ox0 += kStrip) {
        using V = typename Strip<T>::type;
        V acc[kTile];
        for (int j = 0; j < kTile; ++j) {
          const T b0 = (bias != nullptr && j < nb) ? bias[oc0 + j] : T(0);
          acc[j] = V{} + b0;
        }
        const T* wq = wt.data();
        for (int ic = 0; ic < cin; ++ic) {
          const T* plane = xp.data() + static_cast<std::size_t>(ic) * hp * wp;
          for (int ky = 0; ky < k; ++ky) {
            const T* row = plane + static_cast<std::size_t>(oy + ky) * wp + ox0;
            for (int kx = 0; kx < k; ++kx, wq += kTile) {
              V src;
              std::memcpy(&src, row + kx, sizeof(V));
              for (int j = 0; j < kTile; ++j) acc[j] += wq[j] * src;
            }
          }
        }
        for (int j = 0; j < nb; ++j) {
          T* dst = y + (static_cast<std::size_t>(oc0 + j) * h + oy) * width + ox0;
          V out = acc[j];
          if (accumulate) {
            V prev;
            std::memcpy(&prev, dst, sizeof(V));
            out += prev;
          }
          std::memcpy(dst, &out, sizeof(V));
        }
      }
    }
  }
}

// gw += correlation of the padded input with gy, for a K x K "same" kernel.
// Accumulators cover one (ic, ky) row of taps for a tile of output channels.
constexpr int kGradTile = 4;

template <int K, class T>
void direct_weight_grad_image(const T* x, int cin, int h, int width, const T* gy, int cout,
                              T* gw) {
  using V = typename Strip<T>::type;
  constexpr int p = K / 2;
  const int hp = h + 2 * p;
  const int wp = width + 2 * p;
  AlignedVector<T> xp(static_cast<std::size_t>(cin) * hp * wp, T(0));
  for (int c = 0; c < cin; ++c) {
    for (int r = 0; r < h; ++r) {
      std::copy(x + (static_cast<std::size_t>(c) * h + r) * width,
                x + (static_cast<std::size_t>(c) * h + r + 1) * width,
                xp.data() + (static_cast<std::size_t>(c) * hp + r + p) * wp + p);
    }
  }
  AlignedVector<T> gyp(static_cast<std::size_t>(kGradTile) * h * width);
  for (int oc0 = 0; oc0 < cout; oc0 += kGradTile) {
    const int nb = std::min(kGradTile, cout - oc0);
    std::fill(gyp.begin(), gyp.end(), T(0));
    std::copy(gy + static_cast<std::size_t>(oc0) * h * width,
              gy + static_cast<std::size_t>(oc0 + nb) * h * width, gyp.begin());
    // Row blocks keep the gradient rows and input rows of a block in L1.
    constexpr int kRows = 8;
    std::vector<V> partial(static_cast<std::size_t>(cin) * K * K * kGradTile, V{});
    for (int oy0 = 0; oy0 < h; oy0 += kRows) {
      const int oy1 = std::min(h, oy0 + kRows);
      for (int ic = 0; ic < cin; ++ic) {
        for (int ky = 0; ky < K; ++ky) {
          V acc[K][kGradTile];
          for (int kx = 0; kx < K; ++kx) {
            for (int j = 0; j < kGradTile; ++j) acc[kx][j] = V{};
          }
          for (int oy = oy0; oy < oy1; ++oy) {
            const T* row = xp.data() + (static_cast<std::size_t>(ic) * hp + oy + ky) * wp;
            for (int ox0 = 0; ox0 < width; ox0 += kStrip) {
              V g[kGradTile];
              for (int j = 0; j < kGradTile; ++j) {
                std::memcpy(&g[j],
                            gyp.data() + (static_cast<std::size_t>(j) * h + oy) * width + ox0,
                            sizeof(V));
              }
              for (int kx = 0; kx < K; ++kx) {
                V src;
                std::memcpy(&src, row + ox0 + kx, sizeof(V));
                for (int j = 0; j < kGradTile; ++j) acc[kx][j] += g[j] * src;
              }
            }
          }
          V* part = partial.data() + (static_cast<std::size_t>(ic) * K + ky) * K * kGradTile;
          for (int kx = 0; kx < K; ++kx) {
            for (int j = 0; j < kGradTile; ++j) part[kx * kGradTile + j] += acc[kx][j];
          }
        }
      }
    }
    for (int ic = 0; ic < cin; ++ic) {
      for (int ky = 0; ky < K; ++ky) {
        for (int kx = 0; kx < K; ++kx) {
          const V* part =
              partial.data() + ((static_cast<std::size_t>(ic) * K + ky) * K + kx) * kGradTile;
          for (int j = 0; j < nb; ++j) {
            T total = 0;
            for (int l = 0; l < kStrip; ++l) total += part[j][l];
            gw[((static_cast<std::size_t>(oc0 + j) * cin + ic) * K + ky) * K + kx] += total;
          }
        }
      }
    }
  }
}

void check_square_kernel(const Shape& ws) {
  if (ws.h != ws.w) throw ShapeError("convolution kernels must be square, got " + ws.str());
}

}  // namespace

Shape conv2d_output_shape(const Shape& x, const Shape& weight, ConvGeometry g) {
  check_square_kernel(weight);
  if (x.c != weight.c) {
    throw ShapeError("conv2d input channels " + std::to_string(x.c) + " != weight " +
                     weight.str());
  }
  const int k = weight.h;
  const int oh = (x.h + 2 * g.pad - k) / g.stride + 1;
  const int ow = (x.w + 2 * g.pad - k) / g.stride + 1;
  if (oh < 1 || ow < 1) throw ShapeError("conv2d input too small: " + x.str());
  return Shape{x.n, weight.n, oh, ow};
}

Shape conv_transpose2d_output_shape(const Shape& x, const Shape& weight, ConvGeometry g) {
  check_square_kernel(weight);
  if (x.c != weight.n) {
    throw ShapeError("conv_transpose2d input channels " + std::to_string(x.c) + " != weight " +
                     weight.str());
  }
  const int k = weight.h;
  const int oh = (x.h - 1) * g.stride - 2 * g.pad + k + g.output_pad;
  const int ow = (x.w - 1) * g.stride - 2 * g.pad + k + g.output_pad;
  if (oh < 1 || ow < 1) throw ShapeError("conv_transpose2d output empty for " + x.str());
  return Shape{x.n, weight.c, oh, ow};
}

template <class T>
void conv2d_forward(std::span<const T> x, const Shape& xs, std::span<const T> w, const Shape& ws,
                    std::span<const T> bias, ConvGeometry g, std::span<T> y, const Shape& ys) {
  const int k = ws.h;
  if (use_direct(xs, ws, g)) {
    for (int n = 0; n < xs.n; ++n) {
      direct_conv_image(x.data() + n * xs.c * xs.plane(), xs.c, xs.h, xs.w, w.data(), ws.n, k,
                        false, bias.empty() ? nullptr : bias.data(), false,
                        y.data() + n * ys.c * ys.plane());
    }
    return;
  }
  const int rows = xs.c * k * k;
  const int out_plane = ys.h * ys.w;
  AlignedVector<T> col(static_cast<std::size_t>(rows) * out_plane);
  MapConstMat<T> wm(w.data(), ws.n, rows);
  for (int n = 0; n < xs.n; ++n) {
    im2col(x.data() + n * xs.c * xs.plane(), xs.c, xs.h, xs.w, k, g.stride, g.pad, ys.h, ys.w,
           col.data());
    MapConstMat<T> cm(col.data(), rows, out_plane);
    MapMat<T> ym(y.data() + n * ys.c * ys.plane(), ys.c, out_plane);
    ym.noalias() = wm * cm;
    if (!bias.empty()) {
      for (int c = 0; c < ys.c; ++c) ym.row(c).array() += bias[c];
    }
  }
}

template <class T>
void conv2d_backward(std::span<const T> x, const Shape& xs, std::span<const T> w, const Shape& ws,
                     ConvGeometry g, std::span<const T> gy, const Shape& ys, std::span<T> gx,
                     std::span<T> gw, std::span<T> gbias) {
  const int k = ws.h;
  const bool direct = use_direct(xs, ws, g);
  const int rows = xs.c * k * k;
  const int out_plane = ys.h * ys.w;
  AlignedVector<T> col(static_cast<std::size_t>(rows) * out_plane);
  MapConstMat<T> wm(w.data(), ws.n, rows);
  for (int n = 0; n < xs.n; ++n) {
    MapConstMat<T> gym(gy.data() + n * ys.c * ys.plane(), ys.c, out_plane);
    if (!gbias.empty()) {
      for (int c = 0; c < ys.c; ++c) gbias[c] += gym.row(c).sum();
    }
    if (!gw.empty() && direct && k == 3) {
      direct_weight_grad_image<3>(x.data() + n * xs.c * xs.plane(), xs.c, xs.h, xs.w,
                                  gy.data() + n * ys.c * ys.plane(), ys.c, gw.data());
    } else if (!gw.empty()) {
      im2col(x.data() + n * xs.c * xs.plane(), xs.c, xs.h, xs.w, k, g.stride, g.pad, ys.h, ys.w,
             col.data());
      MapConstMat<T> cm(col.data(), rows, out_plane);
      MapMat<T> gwm(gw.data(), ws.n, rows);
      gwm.noalias() += gym * cm.transpose();
    }
    if (!gx.empty() && direct) {
      direct_conv_image(gy.data() + n * ys.c * ys.plane(), ys.c, ys.h, ys.w, w.data(), xs.c, k,
                        true, static_cast<const T*>(nullptr), true,
                        gx.data() + n * xs.c * xs.plane());
    } else if (!gx.empty()) {
      MapMat<T> cm(col.data(), rows, out_plane);
      cm.noalias() = wm.transpose() * gym;
      col2im(col.data(), xs.c, xs.h, xs.w, k, g.stride, g.pad, ys.h, ys.w,
             gx.data() + n * xs.c * xs.plane());
    }
  }
}

template <class T>
void conv_transpose2d_forward(std::span<const T> x, const Shape& xs, std::span<const T> w,
                              const Shape& ws, std::span<const T> bias, ConvGeometry g,
                              std::span<T> y, const Shape& ys) {
  // Adjoint of a convolution that maps (Cout, Ho, Wo) to (Cin, H, W).
  const int k = ws.h;
  const int rows = ys.c * k * k;
  const int in_plane = xs.h * xs.w;
  AlignedVector<T> col(static_cast<std::size_t>(rows) * in_plane);
  MapConstMat<T> wm(w.data(), ws.n, rows);
  std::fill(y.begin(), y.end(), T(0));
  for (int n = 0; n < xs.n; ++n) {
    MapConstMat<T> xm(x.data() + n * xs.c * in_plane, xs.c, in_plane);
    MapMat<T> cm(col.data(), rows, in_plane);
    cm.noalias() = wm.transpose() * xm;
    T* yn = y.data() + n * ys.c * ys.plane();
    col2im(col.data(), ys.c, ys.h, ys.w, k, g.stride, g.pad, xs.h, xs.w, yn);
    if (!bias.empty()) {
      for (int c = 0; c < ys.c; ++c) {
        T* plane = yn + c * ys.plane();
        for (std::size_t i = 0; i < ys.plane(); ++i) plane[i] += bias[c];
      }
    }
  }
}

template <class T>
void conv_transpose2d_backward(std::span<const T> x, const Shape& xs, std::span<const T> w,
                               const Shape& ws, ConvGeometry g, std::span<const T> gy,
                               const Shape& ys, std::span<T> gx, std::span<T> gw,
                               std::span<T> gbias) {
  const int k = ws.h;
  const int rows = ys.c * k * k;
  const int in_plane = xs.h * xs.w;
  AlignedVector<T> col(static_cast<std::size_t>(rows) * in_plane);
  MapConstMat<T> wm(w.data(), ws.n, rows);
  for (int n = 0; n < xs.n; ++n) {
    const T* gyn = gy.data() + n * ys.c * ys.plane();
    if (!gbias.empty()) {
      for (int c = 0; c < ys.c; ++c) {
        const T* plane = gyn + c * ys.plane();
        T acc = 0;
        for (std::size_t i = 0; i < ys.plane(); ++i) acc += plane[i];
        gbias[c] += acc;
      }
    }
    if (gx.empty() && gw.empty()) continue;
    im2col(gyn, ys.c, ys.h, ys.w, k, g.stride, g.pad, xs.h, xs.w, col.data());
    MapConstMat<T> cm(col.data(), rows, in_plane);
    if (!gx.empty()) {
      MapMat<T> gxm(gx.data() + n * xs.c * in_plane, xs.c, in_plane);
      gxm.noalias() += wm * cm;
    }
    if (!gw.empty()) {
      MapConstMat<T> xm(x.data() + n * xs.c * in_plane, xs.c, in_plane);
      MapMat<T> gwm(gw.data(), ws.n, rows);
      gwm.noalias() += xm * cm.transpose();
    }
  }
}

template <class T>
void gdn_forward(std::span<const T> x, const Shape& xs, std::span<const T> beta,
                 std::span<const T> gamma, bool inverse, std::span<T> y) {
  const int c = xs.c;
  const int plane = static_cast<int>(xs.plane());
  MapConstMat<T> gm(gamma.data(), c, c);
  RowMat<T> norm(c, plane);
  for (int n = 0; n < xs.n; ++n) {
    MapConstMat<T> xm(x.data() + n * c * plane, c, plane);
    MapMat<T> ym(y.data() + n * c * plane, c, plane);
    norm.noalias() = gm * xm.array().square().matrix();
    for (int i = 0; i < c; ++i) norm.row(i).array() += beta[i];
    if (inverse) {
      ym.array() = xm.array() * norm.array().sqrt();
    } else {
      ym.array() = xm.array() * norm.array().rsqrt();
    }
  }
}

template <class T>
void gdn_backward(std::span<const T> x, const Shape& xs, std::span<const T> beta,
                  std::span<const T> gamma, bool inverse, std::span<const T> gy, std::span<T> gx,
                  std::span<T> gbeta, std::span<T> ggamma) {
  const int c = xs.c;
  const int plane = static_cast<int>(xs.plane());
  MapConstMat<T> gm(gamma.data(), c, c);
  RowMat<T> sq(c, plane), norm(c, plane), dnorm(c, plane);
  for (int n = 0; n < xs.n; ++n) {
    MapConstMat<T> xm(x.data() + n * c * plane, c, plane);
    MapConstMat<T> gym(gy.data() + n * c * plane, c, plane);
    sq = xm.array().square().matrix();
    norm.noalias() = gm * sq;
    for (int i = 0; i < c; ++i) norm.row(i).array() += beta[i];
    // y = x * norm^e with e = +-1/2, dy/dnorm = e * x * norm^(e - 1).
    if (inverse) {
      dnorm.array() = gym.array() * xm.array() * T(0.5) * norm.array().rsqrt();
    } else {
      dnorm.array() = gym.array() * xm.array() * T(-0.5) * norm.array().rsqrt() / norm.array();
    }
    if (!gx.empty()) {
      MapMat<T> gxm(gx.data() + n * c * plane, c, plane);
      const auto scale = inverse ? RowMat<T>(norm.array().sqrt()) : RowMat<T>(norm.array().rsqrt());
      RowMat<T> back = gm.transpose() * dnorm;
      gxm.array() += gym.array() * scale.array() + T(2) * xm.array() * back.array();
    }
    if (!gbeta.empty()) {
      for (int i = 0; i < c; ++i) gbeta[i] += dnorm.row(i).sum();
    }
    if (!ggamma.empty()) {
      MapMat<T> ggm(ggamma.data(), c, c);
      ggm.noalias() += dnorm * sq.transpose();
    }
  }
}

namespace {

struct BilinearTap {
  int x0, x1, y0, y1;
  double wx, wy;
  bool clamped_x, clamped_y;
};

inline BilinearTap bilinear_tap(double sx, double sy, int width, int height) {
  BilinearTap t{};
  t.clamped_x = sx < 0.0 || sx > width - 1;
  t.clamped_y = sy < 0.0 || sy > height - 1;
  sx = std::clamp(sx, 0.0, static_cast<double>(width - 1));
  sy = std::clamp(sy, 0.0, static_cast<double>(height - 1));
  t.x0 = static_cast<int>(std::floor(sx));
  t.y0 = static_cast<int>(std::floor(sy));
  t.x1 = std::min(t.x0 + 1, width - 1);
  t.y1 = std::min(t.y0 + 1, height - 1);
  t.wx = sx - t.x0;
  t.wy = sy - t.y0;
  return t;
}

}  // namespace

template <class T>
void warp_forward(std::span<const T> frame, const Shape& fs, std::span<const T> flow,
                  std::span<T> y) {
  const int h = fs.h, w = fs.w;
  const std::size_t plane = fs.plane();
  for (int n = 0; n < fs.n; ++n) {
    const T* fx = flow.data() + static_cast<std::size_t>(n) * 2 * plane;
    const T* fy = fx + plane;
    for (int py = 0; py < h; ++py) {
      for (int px = 0; px < w; ++px) {
        const std::size_t p = static_cast<std::size_t>(py) * w + px;
        const auto t = bilinear_tap(px + static_cast<double>(fx[p]), py + static_cast<double>(fy[p]), w, h);
        const T w00 = T((1 - t.wx) * (1 - t.wy)), w01 = T(t.wx * (1 - t.wy));
        const T w10 = T((1 - t.wx) * t.wy), w11 = T(t.wx * t.wy);
        for (int c = 0; c < fs.c; ++c) {
          const T* src = frame.data() + (static_cast<std::size_t>(n) * fs.c + c) * plane;
          y[(static_cast<std::size_t>(n) * fs.c + c) * plane + p] =
              w00 * src[t.y0 * w + t.x0] + w01 * src[t.y0 * w + t.x1] +
              w10 * src[t.y1 * w + t.x0] + w11 * src[t.y1 * w + t.x1];
        }
      }
    }
  }
}

template <class T>
void warp_backward(std::span<const T> frame, const Shape& fs, std::span<const T> flow,
                   std::span<const T> gy, std::span<T> gframe, std::span<T> gflow) {
  const int h = fs.h, w = fs.w;
  const std::size_t plane = fs.plane();
  for (int n = 0; n < fs.n; ++n) {
    const T* fx = flow.data() + static_cast<std::size_t>(n) * 2 * plane;
    const T* fy = fx + plane;
    for (int py = 0; py < h; ++py) {
      for (int px = 0; px < w; ++px) {
        const std::size_t p = static_cast<std::size_t>(py) * w + px;
        const auto t = bilinear_tap(px + static_cast<double>(fx[p]), py + static_cast<double>(fy[p]), w, h);
        const T w00 = T((1 - t.wx) * (1 - t.wy)), w01 = T(t.wx * (1 - t.wy));
        const T w10 = T((1 - t.wx) * t.wy), w11 = T(t.wx * t.wy);
        T dsx = 0, dsy = 0;
        for (int c = 0; c < fs.c; ++c) {
          const std::size_t base = (static_cast<std::size_t>(n) * fs.c + c) * plane;
          const T g = gy[base + p];
          const T* src = frame.data() + base;
          const T v00 = src[t.y0 * w + t.x0], v01 = src[t.y0 * w + t.x1];
          const T v10 = src[t.y1 * w + t.x0], v11 = src[t.y1 * w + t.x1];
          if (!gframe.empty()) {
            T* dst = gframe.data() + base;
            dst[t.y0 * w + t.x0] += w00 * g;
            dst[t.y0 * w + t.x1] += w01 * g;
            dst[t.y1 * w + t.x0] += w10 * g;
            dst[t.y1 * w + t.x1] += w11 * g;
          }
          dsx += g * (T(1 - t.wy) * (v01 - v00) + T(t.wy) * (v11 - v10));
          dsy += g * (T(1 - t.wx) * (v10 - v00) + T(t.wx) * (v11 - v01));
        }
        if (!gflow.empty()) {
          T* gfx = gflow.data() + static_cast<std::size_t>(n) * 2 * plane;
          if (!t.clamped_x) gfx[p] += dsx;
          if (!t.clamped_y) gfx[plane + p] += dsy;
        }
      }
    }
  }
}

template <class T>
void fuse_forward(std::span<const T> a, std::span<const T> b, std::span<const T> mask,
                  const Shape& s, std::span<T> y) {
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    const T* m = mask.data() + n * plane;
    for (int c = 0; c < s.c; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        y[base + p] = m[p] * a[base + p] + (T(1) - m[p]) * b[base + p];
      }
    }
  }
}

template <class T>
void fuse_backward(std::span<const T> a, std::span<const T> b, std::span<const T> mask,
                   const Shape& s, std::span<const T> gy, std::span<T> ga, std::span<T> gb,
                   std::span<T> gmask) {
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n) {
    const T* m = mask.data() + n * plane;
    for (int c = 0; c < s.c; ++c) {
      const std::size_t base = (static_cast<std::size_t>(n) * s.c + c) * plane;
      for (std::size_t p = 0; p < plane; ++p) {
        const T g = gy[base + p];
        if (!ga.empty()) ga[base + p] += m[p] * g;
        if (!gb.empty()) gb[base + p] += (T(1) - m[p]) * g;
        if (!gmask.empty()) gmask[n * plane + p] += g * (a[base + p] - b[base + p]);
      }
    }
  }
}

template <class T>
void avg_pool2_forward(std::span<const T> x, const Shape& xs, std::span<T> y) {
  const int oh = xs.h / 2, ow = xs.w / 2;
  for (int nc = 0; nc < xs.n * xs.c; ++nc) {
    const T* src = x.data() + nc * xs.plane();
    T* dst = y.data() + static_cast<std::size_t>(nc) * oh * ow;
    for (int i = 0; i < oh; ++i) {
      for (int j = 0; j < ow; ++j) {
        const T* r0 = src + 2 * i * xs.w + 2 * j;
        const T* r1 = r0 + xs.w;
        dst[i * ow + j] = T(0.25) * (r0[0] + r0[1] + r1[0] + r1[1]);
      }
    }
  }
}

template <class T>
void avg_pool2_backward(const Shape& xs, std::span<const T> gy, std::span<T> gx) {
  const int oh = xs.h / 2, ow = xs.w / 2;
  for (int nc = 0; nc < xs.n * xs.c; ++nc) {
    T* dst = gx.data() + nc * xs.plane();
    const T* src = gy.data() + static_cast<std::size_t>(nc) * oh * ow;
    for (int i = 0; i < oh; ++i) {
      for (int j = 0; j < ow; ++j) {
        const T g = T(0.25) * src[i * ow + j];
        T* r0 = dst + 2 * i * xs.w + 2 * j;
        T* r1 = r0 + xs.w;
        r0[0] += g;
        r0[1] += g;
        r1[0] += g;
        r1[1] += g;
      }
    }
  }
}

namespace {

struct LinearTap {
  int i0, i1;
  double w1;
};

inline LinearTap upsample_tap(int out_index, int in_size) {
  const double src = std::max((out_index + 0.5) / 2.0 - 0.5, 0.0);
  LinearTap t{};
  t.i0 = std::min(static_cast<int>(std::floor(src)), in_size - 1);
  t.i1 = std::min(t.i0 + 1, in_size - 1);
  t.w1 = src - t.i0;
  return t;
}

}  // namespace

template <class T>
void upsample2x_forward(std::span<const T> x, const Shape& xs, std::span<T> y) {
  const int oh = xs.h * 2, ow = xs.w * 2;
  for (int nc = 0; nc < xs.n * xs.c; ++nc) {
    const T* src = x.data() + nc * xs.plane();
    T* dst = y.data() + static_cast<std::size_t>(nc) * oh * ow;
    for (int i = 0; i < oh; ++i) {
      const auto ty = upsample_tap(i, xs.h);
      for (int j = 0; j < ow; ++j) {
        const auto tx = upsample_tap(j, xs.w);
        const T top = T(1 - tx.w1) * src[ty.i0 * xs.w + tx.i0] + T(tx.w1) * src[ty.i0 * xs.w + tx.i1];
        const T bot = T(1 - tx.w1) * src[ty.i1 * xs.w + tx.i0] + T(tx.w1) * src[ty.i1 * xs.w + tx.i1];
        dst[i * ow + j] = T(1 - ty.w1) * top + T(ty.w1) * bot;
      }
    }
  }
}

template <class T>
void upsample2x_backward(const Shape& xs, std::span<const T> gy, std::span<T> gx) {
  const int oh = xs.h * 2, ow = xs.w * 2;
  for (int nc = 0; nc < xs.n * xs.c; ++nc) {
    T* dst = gx.data() + nc * xs.plane();
    const T* src = gy.data() + static_cast<std::size_t>(nc) * oh * ow;
    for (int i = 0; i < oh; ++i) {
      const auto ty = upsample_tap(i, xs.h);
      for (int j = 0; j < ow; ++j) {
        const auto tx = upsample_tap(j, xs.w);
        const T g = src[i * ow + j];
        dst[ty.i0 * xs.w + tx.i0] += T((1 - ty.w1) * (1 - tx.w1)) * g;
        dst[ty.i0 * xs.w + tx.i1] += T((1 - ty.w1) * tx.w1) * g;
        dst[ty.i1 * xs.w + tx.i0] += T(ty.w1 * (1 - tx.w1)) * g;
        dst[ty.i1 * xs.w + tx.i1] += T(ty.w1 * tx.w1) * g;
      }
    }
  }
}

double laplace_log_bin_prob(double value, double mu, double scale) {
  const double a = std::abs(value - mu);
  if (a >= 0.5) {
    return std::log(0.5) - (a - 0.5) / scale + std::log(-std::expm1(-1.0 / scale));
  }
  const double e1 = std::exp(-(0.5 + a) / scale);
  const double e2 = std::exp(-(0.5 - a) / scale);
  return std::log1p(-0.5 * (e1 + e2));
}

LaplaceBits laplace_bits(double value, double mu, double scale, double p_floor) {
  static const double kLn2 = std::log(2.0);
  const double u = value - mu;
  const double a = std::abs(u);
  const double sign = u > 0 ? 1.0 : (u < 0 ? -1.0 : 0.0);
  double log_p, dlogp_da, dlogp_db;
  if (a >= 0.5) {
    log_p = std::log(0.5) - (a - 0.5) / scale + std::log(-std::expm1(-1.0 / scale));
    dlogp_da = -1.0 / scale;
    dlogp_db = (a - 0.5) / (scale * scale) - 1.0 / (scale * scale * std::expm1(1.0 / scale));
  } else {
    const double e1 = std::exp(-(0.5 + a) / scale);
    const double e2 = std::exp(-(0.5 - a) / scale);
    const double p = 1.0 - 0.5 * (e1 + e2);
    log_p = std::log1p(-0.5 * (e1 + e2));
    dlogp_da = (e1 - e2) / (2.0 * scale) / p;
    dlogp_db = -0.5 * (e1 * (0.5 + a) + e2 * (0.5 - a)) / (scale * scale) / p;
  }
  LaplaceBits out;
  if (log_p < std::log(p_floor)) {
    out.bits = -std::log2(p_floor);
    out.floored = true;
    return out;
  }
  out.bits = -log_p / kLn2;
  out.d_value = -dlogp_da * sign / kLn2;
  out.d_mu = -out.d_value;
  out.d_scale = -dlogp_db / kLn2;
  return out;
}

#define BGOP_INSTANTIATE_KERNELS(T)                                                              \
  template void conv2d_forward<T>(std::span<const T>, const Shape&, std::span<const T>,          \
                                  const Shape&, std::span<const T>, ConvGeometry, std::span<T>,  \
                                  const Shape&);                                                 \
  template void conv2d_backward<T>(std::span<const T>, const Shape&, std::span<const T>,         \
                                   const Shape&, ConvGeometry, std::span<const T>, const Shape&, \
                                   std::span<T>, std::span<T>, std::span<T>);                    \
  template void conv_transpose2d_forward<T>(std::span<const T>, const Shape&,                    \
                                            std::span<const T>, const Shape&,                    \
                                            std::span<const T>, ConvGeometry, std::span<T>,      \
                                            const Shape&);                                       \
  template void conv_transpose2d_backward<T>(                                                    \
      std::span<const T>, const Shape&, std::span<const T>, const Shape&, ConvGeometry,          \
      std::span<const T>, const Shape&, std::span<T>, std::span<T>, std::span<T>);               \
  template void gdn_forward<T>(std::span<const T>, const Shape&, std::span<const T>,             \
                               std::span<const T>, bool, std::span<T>);                          \
  template void gdn_backward<T>(std::span<const T>, const Shape&, std::span<const T>,            \
                                std::span<const T>, bool, std::span<const T>, std::span<T>,      \
                                std::span<T>, std::span<T>);                                     \
  template void warp_forward<T>(std::span<const T>, const Shape&, std::span<const T>,            \
                                std::span<T>);                                                   \
  template void warp_backward<T>(std::span<const T>, const Shape&, std::span<const T>,           \
                                 std::span<const T>, std::span<T>, std::span<T>);                \
  template void fuse_forward<T>(std::span<const T>, std::span<const T>, std::span<const T>,      \
                                const Shape&, std::span<T>);                                     \
  template void fuse_backward<T>(std::span<const T>, std::span<const T>, std::span<const T>,     \
                                 const Shape&, std::span<const T>, std::span<T>, std::span<T>,   \
                                 std::span<T>);                                                  \
  template void avg_pool2_forward<T>(std::span<const T>, const Shape&, std::span<T>);            \
  template void avg_pool2_backward<T>(const Shape&, std::span<const T>, std::span<T>);           \
  template void upsample2x_forward<T>(std::span<const T>, const Shape&, std::span<T>);           \
  template void upsample2x_backward<T>(const Shape&, std::span<const T>, std::span<T>);

BGOP_INSTANTIATE_KERNELS(float)
BGOP_INSTANTIATE_KERNELS(double)

#undef BGOP_INSTANTIATE_KERNELS

}  // namespace bgop::kernels
