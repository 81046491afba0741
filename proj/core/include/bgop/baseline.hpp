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

#include <filesystem>
#include <string>
#include <vector>

#include "bgop/dataset.hpp"

namespace bgop::baseline {

enum class Codec { x264, x265 };

Codec parse_codec(const std::string& name);
std::string to_string(Codec codec);

struct BaselineResult {
  Codec codec = Codec::x264;
  std::string preset;
  int gop = 4;
  int crf = 0;
  double bpp = 0.0;
  double psnr = 0.0;
};

struct BaselineOptions {
  Codec codec = Codec::x264;
  std::string preset = "ultrafast";
  int gop = 4;
  /// Quality ladder; lower CRF means higher quality.
  std::vector<int> crfs{38, 33, 28, 23};
  std::string ffmpeg = "ffmpeg";
};

/// Arguments (argv[0] included) for encoding numbered PNG frames with a closed
/// GOP of `gop` frames.
std::vector<std::string> encode_command(const BaselineOptions& options, int crf,
                                        const std::filesystem::path& frame_pattern,
                                        const std::filesystem::path& output);
std::vector<std::string> decode_command(const BaselineOptions& options,
                                        const std::filesystem::path& input,
                                        const std::filesystem::path& frame_pattern);

/// Resolves a program name against PATH. Empty when not found.
std::filesystem::path find_program(const std::string& name);

/// Runs the external encoder at every CRF over all sequences. Throws
/// EnvironmentError("baseline codec unavailable ...") when ffmpeg is missing.
std::vector<BaselineResult> run_baseline(const data::FrameDataset& dataset,
                                         const BaselineOptions& options);

}  // namespace bgop::baseline
