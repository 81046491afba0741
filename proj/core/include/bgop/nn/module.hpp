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

#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "bgop/autograd.hpp"
#include "bgop/kernels.hpp"

namespace bgop::nn {

using ag::Var;
using Rng = std::mt19937_64;

struct NamedParameter {
  std::string name;
  Var var;
};

/// Base for every network. Owns its parameters and refers to child modules by
/// address, so modules are neither copyable nor movable once wired up.
class Module {
 public:
  Module() = default;
  virtual ~Module() = default;
  Module(const Module&) = delete;
  Module& operator=(const Module&) = delete;

  /// All parameters of this module and its children, with dotted names.
  std::vector<NamedParameter> parameters() const;
  std::size_t parameter_count() const;

  /// Frozen modules keep their weights out of the graph (no gradient).
  void set_trainable(bool trainable);
  void zero_grad();

  /// Copies every parameter value from `other`, which must have the same layout.
  void copy_weights_from(const Module& other);

 protected:
  Var& register_parameter(std::string name, Tensor init);
  void register_module(std::string name, Module& child);

 private:
  void collect(const std::string& prefix, std::vector<NamedParameter>& out) const;

  std::vector<NamedParameter> params_;
  std::vector<std::pair<std::string, Module*>> children_;
};

/// Uniform(-bound, bound) with bound = 1/sqrt(fan_in), matching common conv defaults.
Tensor uniform_init(Shape shape, int fan_in, Rng& rng, float gain = 1.0f);

class Conv2d : public Module {
 public:
  Conv2d(int in_channels, int out_channels, int kernel, int stride, Rng& rng);
  Var operator()(const Var& x) const;
  /// Zero weights and bias: the layer then outputs exactly zero.
  void zero();
  void scale_weights(float s);
  int out_channels() const { return out_channels_; }

 private:
  int out_channels_;
  kernels::ConvGeometry geometry_;
  Var weight_, bias_;
};

/// Transposed convolution that exactly doubles (stride 2) the spatial extent.
class ConvTranspose2d : public Module {
 public:
  ConvTranspose2d(int in_channels, int out_channels, int kernel, int stride, Rng& rng);
  Var operator()(const Var& x) const;

 private:
  kernels::ConvGeometry geometry_;
  Var weight_, bias_;
};

class Gdn : public Module {
 public:
  Gdn(int channels, bool inverse);
  Var operator()(const Var& x) const;
  Tensor beta() const;
  Tensor gamma() const;

 private:
  bool inverse_;
  Var beta_raw_, gamma_raw_;
};

}  // namespace bgop::nn
