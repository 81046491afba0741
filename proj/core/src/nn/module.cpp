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

#include "bgop/nn/module.hpp"

#include <cmath>

#include "bgop/error.hpp"
#include "bgop/ops.hpp"

namespace bgop::nn {

std::vector<NamedParameter> Module::parameters() const {
  std::vector<NamedParameter> out;
  collect("", out);
  return out;
}

std::size_t Module::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.var.value().numel();
  return n;
}

void Module::collect(const std::string& prefix, std::vector<NamedParameter>& out) const {
  for (const auto& p : params_) out.push_back({prefix + p.name, p.var});
  for (const auto& [name, child] : children_) child->collect(prefix + name + ".", out);
}

void Module::set_trainable(bool trainable) {
  for (auto& p : parameters()) {
    p.var.node()->requires_grad = trainable;
    p.var.zero_grad();
  }
}

void Module::zero_grad() {
  for (auto& p : parameters()) p.var.zero_grad();
}

void Module::copy_weights_from(const Module& other) {
  auto mine = parameters();
  auto theirs = other.parameters();
  if (mine.size() != theirs.size()) throw ShapeError("copy_weights_from: layout mismatch");
  for (std::size_t i = 0; i < mine.size(); ++i) {
    require_same_shape(mine[i].var.shape(), theirs[i].var.shape(), mine[i].name.c_str());
    mine[i].var.mutable_value() = theirs[i].var.value();
  }
}

Var& Module::register_parameter(std::string name, Tensor init) {
  params_.push_back({std::move(name), Var(std::move(init), true)});
  return params_.back().var;
}

void Module::register_module(std::string name, Module& child) {
  children_.emplace_back(std::move(name), &child);
}

Tensor uniform_init(Shape shape, int fan_in, Rng& rng, float gain) {
  const float bound = gain / std::sqrt(static_cast<float>(fan_in));
  std::uniform_real_distribution<float> dist(-bound, bound);
  Tensor t(shape);
  for (auto& v : t.data()) v = dist(rng);
  return t;
}

Conv2d::Conv2d(int in_channels, int out_channels, int kernel, int stride, Rng& rng)
    : out_channels_(out_channels), geometry_{stride, kernel / 2, 0} {
  const int fan_in = in_channels * kernel * kernel;
  weight_ = register_parameter("weight",
                               uniform_init({out_channels, in_channels, kernel, kernel}, fan_in, rng));
  bias_ = register_parameter("bias", uniform_init({1, out_channels, 1, 1}, fan_in, rng));
}

Var Conv2d::operator()(const Var& x) const { return ops::conv2d(x, weight_, bias_, geometry_); }

void Conv2d::zero() {
  weight_.mutable_value().fill(0.0f);
  bias_.mutable_value().fill(0.0f);
}

void Conv2d::scale_weights(float s) {
  for (auto& v : weight_.mutable_value().data()) v *= s;
  for (auto& v : bias_.mutable_value().data()) v *= s;
}

ConvTranspose2d::ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride,
                                 Rng& rng)
    : geometry_{stride, kernel / 2, stride - 1} {
  const int fan_in = in_channels * kernel * kernel / (stride * stride);
  weight_ = register_parameter(
      "weight", uniform_init({in_channels, out_channels, kernel, kernel}, fan_in, rng));
  bias_ = register_parameter("bias", uniform_init({1, out_channels, 1, 1}, fan_in, rng));
}

Var ConvTranspose2d::operator()(const Var& x) const {
  return ops::conv_transpose2d(x, weight_, bias_, geometry_);
}

Gdn::Gdn(int channels, bool inverse) : inverse_(inverse) {
  // beta = 1, gamma = 0.1 I, off-diagonal terms start near zero.
  Tensor beta({1, channels, 1, 1}, ops::gdn_raw_from_effective(1.0f));
  Tensor gamma({1, 1, channels, channels}, -6.0f);
  const float diag = ops::gdn_raw_from_effective(0.1f);
  for (int i = 0; i < channels; ++i) gamma[static_cast<std::size_t>(i) * channels + i] = diag;
  beta_raw_ = register_parameter("beta", std::move(beta));
  gamma_raw_ = register_parameter("gamma", std::move(gamma));
}

Var Gdn::operator()(const Var& x) const { return ops::gdn(x, beta_raw_, gamma_raw_, inverse_); }

Tensor Gdn::beta() const { return ops::gdn_effective(beta_raw_.value()); }
Tensor Gdn::gamma() const { return ops::gdn_effective(gamma_raw_.value()); }

}  // namespace bgop::nn
