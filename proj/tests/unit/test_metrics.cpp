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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "bgop/error.hpp"
#include "bgop/metrics.hpp"
#include "fixtures.hpp"

namespace bgop::metrics {
namespace {

TEST(Psnr, IdenticalInputsAreCapped) {
  const std::vector<Tensor> a{testing::random_tensor({1, 3, 8, 8}, 1)};
  EXPECT_EQ(psnr(a, a), kPsnrCap);
  EXPECT_EQ(psnr_from_mse(0.0), 100.0);
  EXPECT_EQ(psnr_from_mse(1e-12), 100.0);
}

TEST(Psnr, KnownValues) {
  EXPECT_NEAR(psnr_from_mse(0.01), 20.0, 1e-12);
  EXPECT_NEAR(psnr_from_mse(1.0), 0.0, 1e-12);
  // one 8-bit step everywhere
  std::vector<Tensor> a{Tensor(Shape{1, 3, 4, 4}, 0.5f)};
  std::vector<Tensor> b{Tensor(Shape{1, 3, 4, 4}, 0.5f + 1.0f / 255.0f)};
  EXPECT_NEAR(psnr(a, b), 48.1308036, 1e-3);
}

TEST(Mse, PoolsAllFramesAndChannels) {
  std::vector<Tensor> a{Tensor(Shape{1, 3, 2, 2}, 0.0f), Tensor(Shape{1, 3, 2, 2}, 0.0f)};
  std::vector<Tensor> b{Tensor(Shape{1, 3, 2, 2}, 0.1f), Tensor(Shape{1, 3, 2, 2}, 0.3f)};
  EXPECT_NEAR(mse(a, b), (0.01 + 0.09) / 2, 1e-7);
  const auto per = frame_psnr(a, b);
  ASSERT_EQ(per.size(), 2u);
  EXPECT_NEAR(per[0], 20.0, 1e-5);
  EXPECT_NEAR(per[1], -10 * std::log10(0.09), 1e-5);
  b.pop_back();
  EXPECT_THROW(mse(a, b), ShapeError);
  std::vector<Tensor> c{Tensor(Shape{1, 3, 2, 3}), Tensor(Shape{1, 3, 2, 2})};
  EXPECT_THROW(mse(a, c), ShapeError);
}

TEST(Mse, OrderIndependent) {
  std::vector<Tensor> a, b;
  for (int i = 0; i < 5; ++i) {
    a.push_back(testing::random_tensor({1, 3, 8, 8}, 10 + i));
    b.push_back(testing::random_tensor({1, 3, 8, 8}, 20 + i));
  }
  const double ref = mse(a, b);
  std::vector<int> idx{3, 0, 4, 1, 2};
  std::vector<Tensor> pa, pb;
  for (int i : idx) {
    pa.push_back(a[i]);
    pb.push_back(b[i]);
  }
  EXPECT_NEAR(mse(pa, pb), ref, 1e-12);
}

TEST(Bpp, NormalizesByCodedPixels) {
  EXPECT_DOUBLE_EQ(bpp(64000, 5, 320, 640), 0.0625);
  EXPECT_DOUBLE_EQ(bpp(2 * 64000, 5, 320, 640), 2 * 0.0625);
  EXPECT_DOUBLE_EQ(bpp(0, 5, 320, 640), 0.0);
  EXPECT_THROW(bpp(1, 0, 320, 640), ContractError);
  EXPECT_THROW(bpp(-1, 1, 320, 640), ContractError);
}

TEST(RdCurve, SinglePointHasHeaderAndRow) {
  const std::string csv = format_rd_curve({{256, 0.1, 30}});
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,bpp,psnr");
}

TEST(RdCurve, SortedByRateAndExact) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<RdPoint> pts;
  for (int i = 0; i < 20; ++i) pts.push_back({u(rng) * 4096, u(rng), 20 + 30 * u(rng)});
  const auto back = parse_rd_curve(format_rd_curve(pts));
  ASSERT_EQ(back.size(), pts.size());
  for (std::size_t i = 1; i < back.size(); ++i) EXPECT_LE(back[i - 1].bpp, back[i].bpp);
  auto sorted = pts;
  std::sort(sorted.begin(), sorted.end(),
            [](const RdPoint& a, const RdPoint& b) { return a.bpp < b.bpp; });
  EXPECT_EQ(back, sorted);

  testing::TempDir dir("rd");
  emit_rd_curve(pts, dir.path() / "rd.csv");
  EXPECT_EQ(read_rd_curve(dir.path() / "rd.csv"), sorted);
  EXPECT_THROW(parse_rd_curve("lambda,bpp,psnr\n1,2\n"), DataError);
  EXPECT_THROW(parse_rd_curve("a,b,c\n"), DataError);
}

}  // namespace
}  // namespace bgop::metrics
