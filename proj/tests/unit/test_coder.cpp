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
#include <cstdlib>
#include <numeric>
#include <random>

#include "bgop/coder.hpp"
#include "bgop/entropy.hpp"
#include "bgop/rangecoder_abi.h"
#include "fixtures.hpp"

namespace bgop::coder {
namespace {

entropy::CdfTable random_table(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> lo(-20, 5), len(1, 40);
  std::exponential_distribution<double> w(1.0);
  const int a = lo(rng);
  std::vector<double> p(len(rng));
  for (auto& v : p) v = std::pow(w(rng), 3);
  const double s = std::accumulate(p.begin(), p.end(), 0.0);
  for (auto& v : p) v /= s;
  return entropy::quantize_pmf(p, a);
}

int draw(const entropy::CdfTable& t, std::mt19937_64& rng) {
  const std::uint32_t u = std::uniform_int_distribution<std::uint32_t>(0, 65535)(rng);
  int s = t.symbol_min;
  while (t.cum_freq[s - t.symbol_min + 1] <= u) ++s;
  return s;
}

TEST(Tables, PackedLayout) {
  const entropy::CdfTable t = entropy::quantize_pmf(std::vector<double>{0.5, 0.5}, -1);
  std::vector<entropy::CdfTable> tables{t, t};
  const auto packed = pack_tables(tables);
  EXPECT_EQ(packed, (std::vector<std::int32_t>{-1, 0, 0, 32768, 65536, -1, 0, 0, 32768, 65536}));
  std::vector<std::int32_t> appended;
  append_table(appended, t, 2);
  EXPECT_EQ(appended, packed);
}

TEST(Loading, MissingLibraryIsEnvironmentError) {
  EXPECT_THROW(DynamicCoder("/nonexistent/libnothing.so"), EnvironmentError);
  EXPECT_THROW(load_coder(std::string("/nonexistent/libnothing.so")), EnvironmentError);
}

TEST(Loading, EnvironmentVariableSelectsLibrary) {
  ::setenv(kLibraryEnv, testing::kTestCoder, 1);
  EXPECT_EQ(configured_library(), testing::kTestCoder);
  EXPECT_NO_THROW(load_coder());
  ::unsetenv(kLibraryEnv);
  EXPECT_EQ(configured_library(), kDefaultLibrary);
}

class Boundary : public ::testing::Test {
 protected:
  DynamicCoder coder{testing::kTestCoder};
};

TEST_F(Boundary, RandomRoundTrips) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> count(0, 300);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = count(rng);
    std::vector<entropy::CdfTable> tables;
    std::vector<std::int32_t> symbols;
    for (int i = 0; i < n; ++i) {
      tables.push_back(random_table(rng));
      symbols.push_back(draw(tables.back(), rng));
    }
    const auto packed = pack_tables(tables);
    const auto bytes = coder.encode(symbols, packed);
    ASSERT_EQ(coder.decode(bytes, packed, symbols.size()), symbols) << trial;
  }
}

TEST_F(Boundary, OutOfRangeSymbolReportsIndex) {
  const auto t = entropy::quantize_pmf(std::vector<double>{0.25, 0.5, 0.25}, -1);
  std::vector<std::int32_t> data;
  append_table(data, t, 4);
  const std::vector<std::int32_t> symbols{0, 1, 2, -1};
  try {
    coder.encode(symbols, data);
    FAIL();
  } catch (const CoderFailure& e) {
    EXPECT_EQ(e.status(), BGOP_RC_SYMBOL_OUT_OF_RANGE);
    EXPECT_EQ(e.symbol_index(), 2u);
  }
}

TEST_F(Boundary, MalformedTablesRejected) {
  const std::vector<std::int32_t> symbols{0};
  EXPECT_THROW(coder.encode(symbols, std::vector<std::int32_t>{0, 1, 0, 100, 65536, 7}), CoderFailure);
  EXPECT_THROW(coder.encode(symbols, std::vector<std::int32_t>{0, 1, 0, 0, 65536}), CoderFailure);
}

TEST_F(Boundary, LargeOutputGrowsBuffer) {
  // Near-uniform 1024-symbol alphabet: about 10 bits per symbol, beyond the
  // initial two-bytes-per-symbol guess only when overhead dominates; use many.
  std::vector<double> p(1024, 1.0 / 1024);
  const auto t = entropy::quantize_pmf(p, 0);
  std::vector<std::int32_t> data;
  std::mt19937_64 rng(3);
  std::vector<std::int32_t> symbols(20000);
  for (auto& s : symbols) s = std::uniform_int_distribution<int>(0, 1023)(rng);
  append_table(data, t, symbols.size());
  const auto bytes = coder.encode(symbols, data);
  EXPECT_NEAR(bytes.size() * 8.0 / symbols.size(), 10.0, 0.05);
  EXPECT_EQ(coder.decode(bytes, data, symbols.size()), symbols);
}

TEST_F(Boundary, CodedLengthNearTableEntropy) {
  const auto t = entropy::quantize_pmf(std::vector<double>{0.99, 0.01}, 0);
  std::mt19937_64 rng(4);
  const std::size_t n = 100000;
  std::vector<std::int32_t> symbols(n);
  double ideal = 0.0;
  for (auto& s : symbols) {
    s = draw(t, rng);
    ideal += entropy::table_bits(t, s);
  }
  std::vector<std::int32_t> data;
  append_table(data, t, n);
  const auto bytes = coder.encode(symbols, data);
  EXPECT_LE(bytes.size() * 8.0, 1.01 * ideal + 64);
}

TEST_F(Boundary, EmptyInput) {
  const auto bytes = coder.encode({}, {});
  EXPECT_LE(bytes.size(), 8u);
  EXPECT_TRUE(coder.decode(bytes, {}, 0).empty());
}

TEST_F(Boundary, TruncationIsDetectedOrDiffers) {
  std::vector<double> p(64, 1.0 / 64);
  const auto t = entropy::quantize_pmf(p, 0);
  std::mt19937_64 rng(5);
  std::vector<std::int32_t> symbols(500);
  for (auto& s : symbols) s = std::uniform_int_distribution<int>(0, 63)(rng);
  std::vector<std::int32_t> data;
  append_table(data, t, symbols.size());
  auto bytes = coder.encode(symbols, data);
  bytes.resize(bytes.size() / 2);
  try {
    EXPECT_NE(coder.decode(bytes, data, symbols.size()), symbols);
  } catch (const CoderFailure& e) {
    EXPECT_EQ(e.status(), BGOP_RC_DECODE_ERROR);
    EXPECT_LT(e.symbol_index(), symbols.size());
  }
}

}  // namespace
}  // namespace bgop::coder
