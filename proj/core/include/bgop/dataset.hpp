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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgop/tensor.hpp"

namespace bgop::data {

inline constexpr int kAlignment = 64;

struct Sequence {
  std::string name;
  std::vector<std::filesystem::path> files;  // empty for generated data
  std::vector<Tensor> frames;                // 1x3xHxW in [0, 1]
  int width = 0;
  int height = 0;
};

struct FrameDataset {
  std::filesystem::path root;
  std::vector<Sequence> sequences;
  nlohmann::json metadata;  // ground truth for generated data, null otherwise

  std::size_t frame_count() const;
  bool empty() const { return frame_count() == 0; }
};

/// Largest multiple of `multiple` not above `extent`.
int aligned_extent(int extent, int multiple = kAlignment);

/// Center crop of a 1xCxHxW tensor; odd margins leave the extra row/column at the end.
Tensor center_crop(const Tensor& frame, int height, int width);

/// 8-bit RGB from PNG (any color type, converted) or binary PPM.
Tensor read_image(const std::filesystem::path& path);
/// Rounds to 8 bits after clamping to [0, 1].
void write_png(const std::filesystem::path& path, const Tensor& frame);

/// Image files directly under `root` form one sequence; otherwise every
/// subdirectory with images is a sequence. Files are ordered by name and
/// center-cropped to the largest multiple of `multiple`.
FrameDataset load_frames(const std::filesystem::path& root, int multiple = kAlignment);

/// Writes `<root>/<sequence>/<index>.png` plus metadata.json when present.
void write_dataset(const FrameDataset& dataset, const std::filesystem::path& root);

struct SyntheticSpec {
  std::uint64_t seed = 0;
  int sequences = 4;
  int frames = 9;
  int width = 128;
  int height = 128;
  int shapes = 3;
  bool still = false;
};

/// Rectangles and discs translating at constant velocity over a static
/// sinusoidal texture, quantized to 8 bits. metadata["sequences"][s]["shapes"]
/// lists each shape with its per-frame displacement in pixels.
FrameDataset make_synthetic_dataset(const SyntheticSpec& spec);

}  // namespace bgop::data
