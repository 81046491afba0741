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

#include <cmath>
#include <vector>

#include "bgop/gop.hpp"
#include "bgop/model.hpp"

namespace {

using namespace bgop;

std::vector<Tensor> moving_frames(int n, int h, int w) {
  std::vector<Tensor> frames;
  for (int f = 0; f <= n; ++f) {
    Tensor t(Shape{1, 3, h, w});
    for (int c = 0; c < 3; ++c)
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
          t.at(0, c, y, x) = 0.5f + 0.4f * std::sin(0.11f * (x - 2.0f * f) + c) * std::cos(0.07f * y);
        }
    frames.push_back(std::move(t));
  }
  return frames;
}

// One N=4 GOP at 64xW through the desk model.
void BM_EncodeGop(benchmark::State& state) {
  const CodecModel model(ModelConfig::desk(), 1);
  const auto frames = moving_frames(4, 64, static_cast<int>(state.range(0)));
  gop::EncodeOptions opt;
  opt.mode = static_cast<entropy::QuantizerMode>(state.range(1));
  for (auto _ : state) {
    auto r = gop::encode_gop(frames, model, opt);
    benchmark::DoNotOptimize(r.bits.total());
  }
}
BENCHMARK(BM_EncodeGop)
    ->Args({64, static_cast<int>(entropy::QuantizerMode::round)})
    ->Args({128, static_cast<int>(entropy::QuantizerMode::round)})
    ->Unit(benchmark::kMillisecond);

void BM_TrainStep(benchmark::State& state) {
  CodecModel model(ModelConfig::desk(), 1);
  const auto frames = moving_frames(4, 64, 64);
  gop::EncodeOptions opt;
  opt.mode = entropy::QuantizerMode::noise;
  for (auto _ : state) {
    auto r = gop::encode_gop(frames, model, opt);
    ag::backward(r.loss_var);
    model.zero_grad();
  }
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMillisecond);

void BM_DecodeGop(benchmark::State& state) {
  const CodecModel model(ModelConfig::desk(), 1);
  const auto frames = moving_frames(4, 64, 64);
  const auto enc = gop::encode_gop(frames, model, {});
  for (auto _ : state) {
    auto out = gop::decode_gop(enc.encoded, model);
    benchmark::DoNotOptimize(out.data());
  }
}
BENCHMARK(BM_DecodeGop)->Unit(benchmark::kMillisecond);

}  // namespace
