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

#include <span>
#include <vector>

#include "bgop/autograd.hpp"
#include "bgop/kernels.hpp"

// Differentiable operations on ag::Var. Shapes are NCHW; scalars are 1x1x1x1.
namespace bgop::ops {

using ag::Var;
using kernels::ConvGeometry;

Var conv2d(const Var& x, const Var& weight, const Var& bias, ConvGeometry g);
Var conv_transpose2d(const Var& x, const Var& weight, const Var& bias, ConvGeometry g);

/// GDN (or IGDN when `inverse`) with unconstrained parameters mapped through
/// `floor + softplus(raw)`, so beta and gamma stay positive.
Var gdn(const Var& x, const Var& beta_raw, const Var& gamma_raw, bool inverse);
/// Effective (reparameterized) GDN parameter values.
Tensor gdn_effective(const Tensor& raw);
/// Inverse of the reparameterization, for initialization.
float gdn_raw_from_effective(float effective);

Var relu(const Var& x);
Var leaky_relu(const Var& x, float slope);
Var sigmoid(const Var& x);
/// floor + log(1 + exp(x)).
Var softplus(const Var& x, float floor = 0.0f);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var scale(const Var& x, float s);
/// x + c where c carries no gradient (noise injection).
Var add_constant(const Var& x, const Tensor& c);

Var concat_channels(std::span<const Var> parts);
Var slice_channels(const Var& x, int start, int count);

Var avg_pool2(const Var& x);
Var upsample2x(const Var& x);

Var warp(const Var& frame, const Var& flow);
Var fuse(const Var& a, const Var& b, const Var& mask);

/// Mean over all elements of (a - b)^2, as a scalar.
Var mse(const Var& a, const Var& b);
Var sum(const Var& x);
Var mean(const Var& x);
/// Weighted sum of scalars.
Var linear_combination(std::span<const Var> terms, std::span<const float> weights);

/// Sum over elements of -log2(max(P(bin around value), p_floor)) under
/// Laplace(mu, max(scale, scale_floor)).
Var laplace_rate_bits(const Var& value, const Var& mu, const Var& scale, float scale_floor,
                      double p_floor);

}  // namespace bgop::ops
