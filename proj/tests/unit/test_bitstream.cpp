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

#include <random>

#include "bgop/bitstream.hpp"
#include "bgop/error.hpp"

namespace bgop::bitstream {
namespace {

StreamHeader sample_header() {
  StreamHeader h;
  h.width = 640;
  h.height = 320;
  h.gop_size = 4;
  h.model_id = 7;
  h.frame_count = 0x01020304;
  return h;
}

Chunk random_chunk(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> byte(0, 255), len(0, 40), kind(0, 2), sym(-511, 511);
  Chunk c;
  c.unit_kind = static_cast<std::uint8_t>(kind(rng));
  int a = sym(rng), b = sym(rng);
  c.main_range = {static_cast<std::int16_t>(std::min(a, b)), static_cast<std::int16_t>(std::max(a, b))};
  a = sym(rng);
  b = sym(rng);
  c.hyper_range = {static_cast<std::int16_t>(std::min(a, b)), static_cast<std::int16_t>(std::max(a, b))};
  c.main_payload.resize(len(rng));
  c.hyper_payload.resize(len(rng));
  for (auto& v : c.main_payload) v = static_cast<std::uint8_t>(byte(rng));
  for (auto& v : c.hyper_payload) v = static_cast<std::uint8_t>(byte(rng));
  return c;
}

TEST(Container, HeaderOnlyLayout) {
  const auto bytes = write_container(sample_header(), {});
  ASSERT_EQ(bytes.size(), kHeaderBytes);
  // magic 4 + version 1 + width 2 + height 2 + gop 1 + model 1 + frame_count 4
  EXPECT_EQ(kHeaderBytes, 4u + 1 + 2 + 2 + 1 + 1 + 4);
  const std::vector<std::uint8_t> expected{'B', 'G', 'O', 'P', 1, 0x02, 0x80, 0x01, 0x40,
                                           4,   7,   0x01, 0x02, 0x03, 0x04};
  EXPECT_EQ(bytes, expected);
}

TEST(Container, ChunkLayoutIsBigEndian) {
  Chunk c;
  c.unit_kind = 2;
  c.main_range = {-3, 300};
  c.hyper_range = {-1, 1};
  c.main_payload = {0xAA, 0xBB};
  c.hyper_payload = {0xCC};
  const std::vector<Chunk> chunks{c};
  const auto bytes = write_container(sample_header(), chunks);
  ASSERT_EQ(bytes.size(), kHeaderBytes + kChunkHeaderBytes + 3);
  const std::vector<std::uint8_t> chunk(bytes.begin() + kHeaderBytes, bytes.end());
  const std::vector<std::uint8_t> expected{2,    0,    0,    0,    2,    0,    0,    0,    1,    0xFF, 0xFD,
                                           0x01, 0x2C, 0xFF, 0xFF, 0x00, 0x01, 0xAA, 0xBB, 0xCC};
  EXPECT_EQ(chunk, expected);
}

TEST(Container, RandomRoundTrip) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<Chunk> chunks(trial % 7);
    for (auto& c : chunks) c = random_chunk(rng);
    StreamHeader h = sample_header();
    h.frame_count = static_cast<std::uint32_t>(rng());
    h.width = static_cast<std::uint16_t>(rng());
    const auto bytes = write_container(h, chunks);
    const Container back = read_container(bytes);
    ASSERT_EQ(back.header, h);
    ASSERT_EQ(back.chunks, chunks);
    ASSERT_EQ(write_container(back.header, back.chunks), bytes);
  }
}

TEST(Container, BadMagicAtOffsetZero) {
  auto bytes = write_container(sample_header(), {});
  bytes[0] ^= 0x01;
  try {
    read_container(bytes);
    FAIL();
  } catch (const ContainerError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(Container, BadVersion) {
  auto bytes = write_container(sample_header(), {});
  bytes[4] = 2;
  try {
    read_container(bytes);
    FAIL();
  } catch (const ContainerError& e) {
    EXPECT_EQ(e.offset(), 4u);
  }
}

// Chunks run to the end of the stream, so a cut on a chunk boundary leaves a
// shorter valid container; every other cut is rejected.
TEST(Container, TruncationInsideAFieldIsRejected) {
  std::mt19937_64 rng(2);
  std::vector<Chunk> chunks{random_chunk(rng), random_chunk(rng)};
  chunks[0].main_payload.assign(5, 1);
  const auto bytes = write_container(sample_header(), chunks);
  const std::size_t first_end = kHeaderBytes + kChunkHeaderBytes + chunks[0].main_payload.size() +
                                chunks[0].hyper_payload.size();
  for (std::size_t n = 0; n < bytes.size(); ++n) {
    const std::vector<std::uint8_t> cut(bytes.begin(), bytes.begin() + n);
    if (n == kHeaderBytes || n == first_end) {
      const auto c = read_container(cut);
      EXPECT_EQ(c.chunks.size(), n == kHeaderBytes ? 0u : 1u);
      continue;
    }
    EXPECT_THROW(read_container(cut), ContainerError) << n;
  }
}

TEST(Container, TruncatedPayloadReportsChunkOffset) {
  Chunk c;
  c.main_payload.assign(10, 0);
  const std::vector<Chunk> chunks{c};
  auto bytes = write_container(sample_header(), chunks);
  bytes.resize(bytes.size() - 1);
  try {
    read_container(bytes);
    FAIL();
  } catch (const ContainerError& e) {
    EXPECT_GE(e.offset(), kHeaderBytes);
    EXPECT_LE(e.offset(), bytes.size());
  }
}

TEST(Container, InvalidFieldsRejected) {
  Chunk c;
  c.unit_kind = 3;
  std::vector<Chunk> chunks{c};
  EXPECT_THROW(write_container(sample_header(), chunks), ContractError);
  chunks[0].unit_kind = 0;
  chunks[0].main_range = {5, 4};
  EXPECT_THROW(write_container(sample_header(), chunks), ContractError);

  chunks[0].main_range = {0, 0};
  auto bytes = write_container(sample_header(), chunks);
  bytes[kHeaderBytes] = 9;
  try {
    read_container(bytes);
    FAIL();
  } catch (const ContainerError& e) {
    EXPECT_EQ(e.offset(), kHeaderBytes);
  }
  bytes[kHeaderBytes] = 0;
  bytes[kHeaderBytes + 9] = 0x7F;  // main_min above main_max
  EXPECT_THROW(read_container(bytes), ContainerError);
}

}  // namespace
}  // namespace bgop::bitstream
