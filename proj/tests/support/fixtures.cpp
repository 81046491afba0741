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

#include "fixtures.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unistd.h>

namespace bgop::testing {

ModelConfig tiny_config() {
  ModelConfig c;
  c.hidden_channels = 8;
  c.latent_channels = 8;
  c.hyper_channels = 8;
  c.flow_levels = 3;
  c.flow_channels = {8};
  c.mask_channels = 4;
  c.postproc_channels = 4;
  c.postproc_blocks = 2;
  return c;
}

Tensor random_tensor(Shape shape, std::uint64_t seed, float lo, float hi) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(lo, hi);
  Tensor t(shape);
  for (auto& v : t.data()) v = u(rng);
  return t;
}

Tensor smooth_frame(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  Tensor t(shape);
  for (int n = 0; n < shape.n; ++n) {
    for (int c = 0; c < shape.c; ++c) {
      const float fx = 0.05f + 0.1f * u(rng), fy = 0.05f + 0.1f * u(rng), ph = 6.28f * u(rng);
      for (int y = 0; y < shape.h; ++y) {
        for (int x = 0; x < shape.w; ++x) {
          const float v = 0.5f + 0.35f * std::sin(fx * x + fy * y + ph) + 0.05f * (u(rng) - 0.5f);
          t.at(n, c, y, x) = std::clamp(v, 0.0f, 1.0f);
        }
      }
    }
  }
  return t;
}

std::vector<Tensor> moving_gop(int gop_size, int height, int width, std::uint64_t seed, float dx,
                               float dy, int batch) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 1.0f);
  float fx[3], fy[3], ph[3];
  for (int c = 0; c < 3; ++c) {
    fx[c] = 0.1f + 0.2f * u(rng);
    fy[c] = 0.1f + 0.2f * u(rng);
    ph[c] = 6.28f * u(rng);
  }
  std::vector<Tensor> frames;
  for (int t = 0; t <= gop_size; ++t) {
    Tensor f(Shape{batch, 3, height, width});
    for (int n = 0; n < batch; ++n) {
      for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < height; ++y) {
          for (int x = 0; x < width; ++x) {
            const float sx = x - dx * t + 7.0f * n, sy = y - dy * t;
            f.at(n, c, y, x) = 0.5f + 0.4f * std::sin(fx[c] * sx) * std::cos(fy[c] * sy + ph[c]);
          }
        }
      }
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

TempDir::TempDir(const std::string& tag) {
  static std::atomic<int> counter{0};
  path_ = std::filesystem::temp_directory_path() /
          ("bgop_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
  std::filesystem::remove_all(path_);
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace bgop::testing
