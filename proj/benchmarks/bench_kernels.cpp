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

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "bgop/kernels.hpp"

namespace {

using bgop::Shape;
namespace kernels = bgop::kernels;

std::vector<float> filled(std::size_t n, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(-1.0f, 1.0f);
  std::vector<float> v(n);
  for (auto& x : v) x = u(rng);
  return v;
}

// args: channels in/out, extent, kernel, stride
void BM_Conv2dForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int hw = static_cast<int>(state.range(1));
  const int k = static_cast<int>(state.range(2));
  const int stride = static_cast<int>(state.range(3));
  const Shape xs{1, c, hw, hw}, ws{c, c, k, k};
  const kernels::ConvGeometry g{stride, k / 2, 0};
  const Shape ys = kernels::conv2d_output_shape(xs, ws, g);
  const auto x = filled(xs.numel(), 1), w = filled(ws.numel(), 2), b = filled(c, 3);
  std::vector<float> y(ys.numel());
  for (auto _ : state) {
    kernels::conv2d_forward<float>(x, xs, w, ws, b, g, y, ys);
    benchmark::DoNotOptimize(y.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(ys.numel()) * c * k * k);
}
BENCHMARK(BM_Conv2dForward)
    ->Args({3, 64, 3, 1})
    ->Args({48, 64, 3, 1})
    ->Args({48, 64, 5, 2})
    ->Args({96, 32, 5, 2});

void BM_Conv2dBackward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int hw = static_cast<int>(state.range(1));
  const Shape xs{1, c, hw, hw}, ws{c, c, 5, 5};
  const kernels::ConvGeometry g{2, 2, 0};
  const Shape ys = kernels::conv2d_output_shape(xs, ws, g);
  const auto x = filled(xs.numel(), 1), w = filled(ws.numel(), 2), gy = filled(ys.numel(), 3);
  std::vector<float> gx(xs.numel()), gw(ws.numel()), gb(c);
  for (auto _ : state) {
    std::fill(gw.begin(), gw.end(), 0.0f);
    std::fill(gb.begin(), gb.end(), 0.0f);
    kernels::conv2d_backward<float>(x, xs, w, ws, g, gy, ys, gx, gw, gb);
    benchmark::DoNotOptimize(gx.data());
  }
}
BENCHMARK(BM_Conv2dBackward)->Args({48, 64})->Args({96, 32});

void BM_ConvTranspose2dForward(benchmark::State& state) {
  const int c = static_cast<int>(state.range(0));
  const int hw = static_cast<int>(state.range(1));
  const Shape xs{1, c, hw, hw}, ws{c, c, 5, 5};
  const kernels::ConvGeometry g{2, 2, 1};
  const Shape ys = kernels::conv_transpose2d_output_shape(xs, ws, g);
  const auto x = filled(xs.numel(), 1), w = filled(ws.numel(), 2), b = filled(c, 3);
  std::vector<float> y(ys.numel());
  for (auto _ : state) {
    kernels::conv_transpose2d_forward<float>(x, xs, w, ws, b, g, y, ys);
    benchmark::DoNotOptimize(y.data());
  }
}
BENCHMARK(BM_ConvTranspose2dForward)->Args({48, 32})->Args({96, 16});

void BM_Warp(benchmark::State& state) {
  const int hw = static_cast<int>(state.range(0));
  const Shape s{1, 3, hw, hw};
  const auto frame = filled(s.numel(), 1);
  auto flow = filled(static_cast<std::size_t>(2) * hw * hw, 2);
  for (auto& f : flow) f *= 4.0f;
  std::vector<float> out(s.numel());
  for (auto _ : state) {
    kernels::warp_forward<float>(frame, s, flow, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<long long>(s.numel()));
}
BENCHMARK(BM_Warp)->Arg(64)->Arg(256);

}  // namespace
