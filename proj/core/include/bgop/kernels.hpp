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

#pragma once

// Raw forward/backward kernels shared by the autograd ops. They are templated on
// the scalar type and instantiated for float (training and inference) and double
// (gradient verification). Backward kernels accumulate into their outputs; an
// empty span skips that gradient.

#include <span>

#include "bgop/tensor.hpp"

namespace bgop::kernels {

struct ConvGeometry {
  int stride = 1;
  int pad = 0;
  int output_pad = 0;  // transposed convolution only
};

/// Output extent of a convolution with weights (Cout, Cin, K, K).
Shape conv2d_output_shape(const Shape& x, const Shape& weight, ConvGeometry g);
/// Output extent of a transposed convolution with weights (Cin, Cout, K, K).
Shape conv_transpose2d_output_shape(const Shape& x, const Shape& weight, ConvGeometry g);

template <class T>
void conv2d_forward(std::span<const T> x, const Shape& xs, std::span<const T> w, const Shape& ws,
                    std::span<const T> bias, ConvGeometry g, std::span<T> y, const Shape& ys);

template <class T>
void conv2d_backward(std::span<const T> x, const Shape& xs, std::span<const T> w, const Shape& ws,
                     ConvGeometry g, std::span<const T> gy, const Shape& ys, std::span<T> gx,
                     std::span<T> gw, std::span<T> gbias);

template <class T>
void conv_transpose2d_forward(std::span<const T> x, const Shape& xs, std::span<const T> w,
                              const Shape& ws, std::span<const T> bias, ConvGeometry g,
                              std::span<T> y, const Shape& ys);

template <class T>
void conv_transpose2d_backward(std::span<const T> x, const Shape& xs, std::span<const T> w,
                               const Shape& ws, ConvGeometry g, std::span<const T> gy,
                               const Shape& ys, std::span<T> gx, std::span<T> gw,
                               std::span<T> gbias);

/// Generalized divisive normalization over channels at every pixel:
///   forward  y_i = x_i / sqrt(beta_i + sum_j gamma_ij x_j^2)
///   inverse  y_i = x_i * sqrt(beta_i + sum_j gamma_ij x_j^2)
/// `gamma` is C x C row-major (gamma[i * C + j]).
template <class T>
void gdn_forward(std::span<const T> x, const Shape& xs, std::span<const T> beta,
                 std::span<const T> gamma, bool inverse, std::span<T> y);

template <class T>
void gdn_backward(std::span<const T> x, const Shape& xs, std::span<const T> beta,
                  std::span<const T> gamma, bool inverse, std::span<const T> gy, std::span<T> gx,
                  std::span<T> gbeta, std::span<T> ggamma);

/// Backward bilinear warp. `flow` is (N, 2, H, W) holding (dx, dy) on the output
/// grid; sample positions are clamped to the frame border.
template <class T>
void warp_forward(std::span<const T> frame, const Shape& fs, std::span<const T> flow,
                  std::span<T> y);

template <class T>
void warp_backward(std::span<const T> frame, const Shape& fs, std::span<const T> flow,
                   std::span<const T> gy, std::span<T> gframe, std::span<T> gflow);

/// y = mask * a + (1 - mask) * b, mask is (N, 1, H, W) broadcast over channels.
template <class T>
void fuse_forward(std::span<const T> a, std::span<const T> b, std::span<const T> mask,
                  const Shape& s, std::span<T> y);

template <class T>
void fuse_backward(std::span<const T> a, std::span<const T> b, std::span<const T> mask,
                   const Shape& s, std::span<const T> gy, std::span<T> ga, std::span<T> gb,
                   std::span<T> gmask);

/// 2x2 mean pooling, stride 2.
template <class T>
void avg_pool2_forward(std::span<const T> x, const Shape& xs, std::span<T> y);
template <class T>
void avg_pool2_backward(const Shape& xs, std::span<const T> gy, std::span<T> gx);

/// Bilinear 2x upsampling with half-pixel centers and edge clamping.
template <class T>
void upsample2x_forward(std::span<const T> x, const Shape& xs, std::span<T> y);
template <class T>
void upsample2x_backward(const Shape& xs, std::span<const T> gy, std::span<T> gx);

/// Code length of one integer bin under a Laplace(mu, scale) density, with its
/// partial derivatives. Always evaluated in double.
struct LaplaceBits {
  double bits = 0.0;
  double d_value = 0.0;
  double d_mu = 0.0;
  double d_scale = 0.0;
  bool floored = false;  // probability hit the floor; derivatives are zero
};

/// Natural log of F(v + 0.5) - F(v - 0.5) for the Laplace CDF F.
double laplace_log_bin_prob(double value, double mu, double scale);
LaplaceBits laplace_bits(double value, double mu, double scale, double p_floor);

}  // namespace bgop::kernels
