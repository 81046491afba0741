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
#include <span>
#include <string>
#include <vector>

#include "bgop/tensor.hpp"

namespace bgop::metrics {

/// PSNR reported for identical inputs.
inline constexpr double kPsnrCap = 100.0;

/// Mean squared error over every frame, channel and pixel. Frame lists must
/// match in length and shape.
double mse(std::span<const Tensor> a, std::span<const Tensor> b);
/// 10 log10(1 / mse) for [0, 1] intensities, capped at kPsnrCap.
double psnr_from_mse(double mse);
double psnr(std::span<const Tensor> a, std::span<const Tensor> b);
std::vector<double> frame_psnr(std::span<const Tensor> a, std::span<const Tensor> b);

/// total_bits / (frames * height * width).
double bpp(double total_bits, long long frame_count, int height, int width);

struct RdPoint {
  double lambda = 0.0;
  double bpp = 0.0;
  double psnr = 0.0;
  bool operator==(const RdPoint&) const = default;
};

/// CSV text with header "lambda,bpp,psnr", rows sorted by bpp. Values use
/// enough digits to parse back exactly.
std::string format_rd_curve(std::vector<RdPoint> points);
void emit_rd_curve(const std::vector<RdPoint>& points, const std::filesystem::path& path);
std::vector<RdPoint> parse_rd_curve(const std::string& csv);
std::vector<RdPoint> read_rd_curve(const std::filesystem::path& path);

}  // namespace bgop::metrics
