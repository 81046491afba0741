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

#include "bgop/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <utility>

#include "bgop/error.hpp"

namespace bgop {

std::string Shape::str() const {
  return std::to_string(n) + "x" + std::to_string(c) + "x" + std::to_string(h) + "x" +
         std::to_string(w);
}

Tensor::Tensor(Shape shape, float fill) : shape_(shape), data_(shape.numel(), fill) {
  if (shape.n < 1 || shape.c < 1 || shape.h < 1 || shape.w < 1) {
    throw ShapeError("tensor dims must be >= 1, got " + shape.str());
  }
}

Tensor::Tensor(Shape shape, std::vector<float> data)
    : shape_(shape), data_(data.begin(), data.end()) {
  if (data_.size() != shape.numel()) {
    throw ShapeError("tensor data size " + std::to_string(data_.size()) +
                     " does not match shape " + shape.str());
  }
}

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape.numel() != numel()) {
    throw ShapeError("cannot reshape " + shape_.str() + " to " + shape.str());
  }
  Tensor out = *this;
  out.shape_ = shape;
  return out;
}

Tensor Tensor::slice_channels(int start, int count) const {
  if (start < 0 || count < 1 || start + count > shape_.c) {
    throw ShapeError("channel slice out of range for " + shape_.str());
  }
  Tensor out(Shape{shape_.n, count, shape_.h, shape_.w});
  const std::size_t plane = shape_.plane();
  for (int n = 0; n < shape_.n; ++n) {
    const float* src = data_.data() + (static_cast<std::size_t>(n) * shape_.c + start) * plane;
    float* dst = out.data_.data() + static_cast<std::size_t>(n) * count * plane;
    std::copy(src, src + count * plane, dst);
  }
  return out;
}

Tensor Tensor::batch_item(int n) const {
  if (n < 0 || n >= shape_.n) throw ShapeError("batch index out of range");
  const std::size_t len = static_cast<std::size_t>(shape_.c) * shape_.plane();
  return Tensor(Shape{1, shape_.c, shape_.h, shape_.w},
                std::vector<float>(data_.begin() + n * len, data_.begin() + (n + 1) * len));
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

float Tensor::sum() const {
  double acc = 0.0;
  for (float v : data_) acc += v;
  return static_cast<float>(acc);
}

float Tensor::max_abs() const {
  float m = 0.0f;
  for (float v : data_) m = std::max(m, std::abs(v));
  return m;
}

Tensor concat_channels(std::span<const Tensor> parts) {
  if (parts.empty()) throw ShapeError("concat of zero tensors");
  Shape out_shape = parts.front().shape();
  out_shape.c = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    if (s.n != out_shape.n || s.h != out_shape.h || s.w != out_shape.w) {
      throw ShapeError("concat extent mismatch: " + s.str());
    }
    out_shape.c += s.c;
  }
  Tensor out(out_shape);
  const std::size_t plane = out_shape.plane();
  for (int n = 0; n < out_shape.n; ++n) {
    float* dst = out.data().data() + static_cast<std::size_t>(n) * out_shape.c * plane;
    for (const auto& p : parts) {
      const std::size_t len = static_cast<std::size_t>(p.shape().c) * plane;
      const float* src = p.data().data() + n * len;
      dst = std::copy(src, src + len, dst);
    }
  }
  return out;
}

Tensor stack_batch(std::span<const Tensor> items) {
  if (items.empty()) throw ShapeError("stack of zero tensors");
  Shape s = items.front().shape();
  if (s.n != 1) throw ShapeError("stack_batch expects batch-1 items");
  std::vector<float> data;
  data.reserve(s.numel() * items.size());
  for (const auto& t : items) {
    require_same_shape(t.shape(), s, "stack_batch");
    data.insert(data.end(), t.data().begin(), t.data().end());
  }
  s.n = static_cast<int>(items.size());
  return Tensor(s, std::move(data));
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() &&
         std::memcmp(a.data().data(), b.data().data(), a.numel() * sizeof(float)) == 0;
}

void require_same_shape(const Shape& a, const Shape& b, const char* what) {
  if (!(a == b)) {
    throw ShapeError(std::string(what) + ": shape mismatch " + a.str() + " vs " + b.str());
  }
}

}  // namespace bgop
