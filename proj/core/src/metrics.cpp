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

#include "bgop/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bgop/error.hpp"

namespace bgop::metrics {
namespace {

double frame_sse(const Tensor& a, const Tensor& b) {
  require_same_shape(a.shape(), b.shape(), "psnr frames");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.numel(); ++i) {
    const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
    sse += d * d;
  }
  return sse;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double mse(std::span<const Tensor> a, std::span<const Tensor> b) {
  if (a.size() != b.size()) {
    throw ShapeError("frame counts differ: " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (a.empty()) throw ShapeError("no frames to compare");
  double sse = 0.0;
  double count = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sse += frame_sse(a[i], b[i]);
    count += static_cast<double>(a[i].numel());
  }
  return sse / count;
}

double psnr_from_mse(double m) {
  if (m < 0 || std::isnan(m)) throw ContractError("mse must be nonnegative");
  if (m == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

double psnr(std::span<const Tensor> a, std::span<const Tensor> b) { return psnr_from_mse(mse(a, b)); }

std::vector<double> frame_psnr(std::span<const Tensor> a, std::span<const Tensor> b) {
  if (a.size() != b.size()) throw ShapeError("frame counts differ");
  std::vector<double> out;
  out.reserve(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out.push_back(psnr_from_mse(frame_sse(a[i], b[i]) / static_cast<double>(a[i].numel())));
  }
  return out;
}

double bpp(double total_bits, long long frame_count, int height, int width) {
  if (frame_count <= 0 || height <= 0 || width <= 0) {
    throw ContractError("bpp needs a positive pixel count");
  }
  if (total_bits < 0) throw ContractError("bit count must be nonnegative");
  return total_bits / (static_cast<double>(frame_count) * height * width);
}

std::string format_rd_curve(std::vector<RdPoint> points) {
  if (points.empty()) throw ContractError("an RD curve needs at least one point");
  std::stable_sort(points.begin(), points.end(),
                   [](const RdPoint& a, const RdPoint& b) { return a.bpp < b.bpp; });
  std::string out = "lambda,bpp,psnr\n";
  for (const auto& p : points) {
    out += number(p.lambda) + "," + number(p.bpp) + "," + number(p.psnr) + "\n";
  }
  return out;
}

void emit_rd_curve(const std::vector<RdPoint>& points, const std::filesystem::path& path) {
  const std::string text = format_rd_curve(points);
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("failed writing " + path.string());
}

std::vector<RdPoint> parse_rd_curve(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line) || line != "lambda,bpp,psnr") {
    throw DataError("RD curve lacks the lambda,bpp,psnr header");
  }
  std::vector<RdPoint> out;
  for (int row = 2; std::getline(in, line); ++row) {
    if (line.empty()) continue;
    RdPoint p;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf%c", &p.lambda, &p.bpp, &p.psnr, &tail) != 3) {
      throw DataError("malformed RD curve row " + std::to_string(row) + ": " + line);
    }
    out.push_back(p);
  }
  return out;
}

std::vector<RdPoint> read_rd_curve(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_rd_curve(ss.str());
}

}  // namespace bgop::metrics
