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

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

// .bgp container. Every multi-byte field is big-endian.
//
//   header (15 bytes)
//     magic        4   "BGOP"
//     version      u8  1
//     width        u16
//     height       u16
//     gop_size     u8
//     model_id     u8
//     frame_count  u32
//   chunk, repeated until end of stream (17 bytes + payloads)
//     unit_kind    u8  0 intra, 1 flow, 2 residual
//     main_len     u32
//     hyper_len    u32
//     main_min     i16
//     main_max     i16
//     hyper_min    i16
//     hyper_max    i16
//     main payload, hyper payload
namespace bgop::bitstream {

inline constexpr std::array<std::uint8_t, 4> kMagic{'B', 'G', 'O', 'P'};
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderBytes = 15;
inline constexpr std::size_t kChunkHeaderBytes = 17;

struct StreamHeader {
  std::uint8_t version = kVersion;
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t gop_size = 0;
  std::uint8_t model_id = 0;
  std::uint32_t frame_count = 0;
  bool operator==(const StreamHeader&) const = default;
};

struct SymbolRange {
  std::int16_t min = 0;
  std::int16_t max = 0;
  bool operator==(const SymbolRange&) const = default;
};

struct Chunk {
  std::uint8_t unit_kind = 0;
  SymbolRange main_range;
  SymbolRange hyper_range;
  std::vector<std::uint8_t> main_payload;
  std::vector<std::uint8_t> hyper_payload;
  bool operator==(const Chunk&) const = default;
};

struct Container {
  StreamHeader header;
  std::vector<Chunk> chunks;
};

/// Throws ContractError for an unknown unit kind, an inverted symbol range or a
/// payload longer than 2^32 - 1 bytes.
std::vector<std::uint8_t> write_container(const StreamHeader& header, std::span<const Chunk> chunks);

/// Exact inverse of write_container. Malformed input throws ContainerError with
/// the offset of the offending field.
Container read_container(std::span<const std::uint8_t> bytes);

}  // namespace bgop::bitstream
