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
#include <span>
#include <vector>

#include "bgop/bitstream.hpp"
#include "bgop/coder.hpp"
#include "bgop/gop.hpp"

namespace bgop::stream {

/// Sizes of the successive GOPs covering `frame_count` frames. Full GOPs of
/// `gop_size` come first; a shorter tail is split into smaller powers of two.
/// A single frame yields {0} (one key frame, no GOP body).
std::vector<int> gop_partition(int frame_count, int gop_size);

struct SequenceCoding {
  int gop_size = 0;
  int width = 0;
  int height = 0;
  int model_id = 0;
  std::vector<gop::EncodedGop> gops;
  std::vector<Tensor> reconstructed;  // one per input frame
  gop::RateBits estimated_bits;       // shared key frames counted once
  double mse = 0.0;                   // over every frame, channel and pixel

  int frame_count() const { return static_cast<int>(reconstructed.size()); }
};

/// Codes frames (each 1x3xHxW) GOP by GOP; each GOP after the first starts
/// from the previous GOP's last reconstruction.
SequenceCoding encode_sequence(const std::vector<Tensor>& frames, const CodecModel& model,
                               int gop_size);
std::vector<Tensor> decode_sequence(const std::vector<gop::EncodedGop>& gops,
                                    const CodecModel& model);

/// Range-codes every payload into a .bgp byte stream.
std::vector<std::uint8_t> write_stream(const SequenceCoding& coding, const CodecModel& model,
                                       coder::SymbolCoder& coder);

struct ParsedStream {
  bitstream::StreamHeader header;
  std::vector<gop::EncodedGop> gops;
  std::vector<std::size_t> chunk_bytes;  // coded size of every chunk, payloads only
};

/// Container parse plus entropy decoding of all symbols. Payload problems throw
/// DecodeError naming the chunk index.
ParsedStream read_stream(std::span<const std::uint8_t> bytes, const CodecModel& model,
                         coder::SymbolCoder& coder);

/// read_stream followed by decode_sequence.
std::vector<Tensor> decode_stream(std::span<const std::uint8_t> bytes, const CodecModel& model,
                                  coder::SymbolCoder& coder);

/// Tables for the main latent of one payload: one Laplace per element, from the
/// decoded hyper latent, over [symbol_min, symbol_max].
std::vector<std::int32_t> main_tables(const nn::CompressionNet& net, const gop::LatentStream& hyper,
                                      int symbol_min, int symbol_max);
/// One unit-Laplace table over the hyper span, repeated `count` times.
std::vector<std::int32_t> hyper_tables(std::size_t count, int symbol_min, int symbol_max);

}  // namespace bgop::stream
