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

#include <cstddef>
#include <cstdint>
#include <new>
#include <span>
#include <string>
#include <vector>

namespace bgop {

/// Every buffer starts on a 64-byte boundary. Vectorized products peel loops by
/// pointer alignment, so a fixed alignment keeps results independent of where
/// the allocator happened to place the data.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t kAlignment{64};

  AlignedAllocator() = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) { return static_cast<T*>(::operator new(n * sizeof(T), kAlignment)); }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, kAlignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept {
    return true;
  }
};

template <class T>
using AlignedVector = std::vector<T, AlignedAllocator<T>>;

/// NCHW extent. Every tensor in the codec is four dimensional; scalars are 1x1x1x1.
struct Shape {
  int n = 1;
  int c = 1;
  int h = 1;
  int w = 1;

  std::size_t numel() const noexcept {
    return static_cast<std::size_t>(n) * c * h * w;
  }
  std::size_t plane() const noexcept { return static_cast<std::size_t>(h) * w; }
  bool operator==(const Shape&) const = default;
  std::string str() const;
};

/// Dense float tensor with value semantics.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, float fill = 0.0f);
  Tensor(Shape shape, std::vector<float> data);

  static Tensor scalar(float v) { return Tensor(Shape{}, v); }

  const Shape& shape() const noexcept { return shape_; }
  std::size_t numel() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  /// Copy of the values in NCHW order.
  std::vector<float> to_vector() const { return {data_.begin(), data_.end()}; }

  float& operator[](std::size_t i) { return data_[i]; }
  float operator[](std::size_t i) const { return data_[i]; }
  float& at(int n, int c, int h, int w) {
    return data_[((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }
  float at(int n, int c, int h, int w) const {
    return data_[((static_cast<std::size_t>(n) * shape_.c + c) * shape_.h + h) * shape_.w + w];
  }

  void fill(float v);
  /// Same storage, new extent. Element count must match.
  Tensor reshaped(Shape shape) const;
  /// Channel range [start, start + count).
  Tensor slice_channels(int start, int count) const;
  /// One batch element as a 1xCxHxW tensor.
  Tensor batch_item(int n) const;

  bool all_finite() const;
  float sum() const;
  float max_abs() const;

 private:
  Shape shape_{};
  AlignedVector<float> data_;
};

/// Concatenate along the channel axis. Batch and spatial extents must agree.
Tensor concat_channels(std::span<const Tensor> parts);
/// Stack 1xCxHxW tensors into a batch.
Tensor stack_batch(std::span<const Tensor> items);

/// Throws ShapeError with `what` unless `a == b`.
void require_same_shape(const Shape& a, const Shape& b, const char* what);

/// Same shape and identical bit patterns.
bool bitwise_equal(const Tensor& a, const Tensor& b);

}  // namespace bgop
