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
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bgop/model.hpp"
#include "bgop/tensor.hpp"

namespace bgop::testing {

/// Path of the test range coder built next to the tests.
inline constexpr const char* kTestCoder = BGOP_TEST_CODER;

/// Narrow layout with the default strides: fast enough for unit tests.
ModelConfig tiny_config();

/// Uniform values in [lo, hi).
Tensor random_tensor(Shape shape, std::uint64_t seed, float lo = 0.0f, float hi = 1.0f);

/// Smooth image content: low-frequency sinusoids plus a little noise, in [0, 1].
Tensor smooth_frame(Shape shape, std::uint64_t seed);

/// N + 1 frames of a smooth pattern translating by `dx`, `dy` pixels per frame.
std::vector<Tensor> moving_gop(int gop_size, int height, int width, std::uint64_t seed,
                               float dx = 1.0f, float dy = 0.5f, int batch = 1);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

}  // namespace bgop::testing
