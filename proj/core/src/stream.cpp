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

#include "bgop/stream.hpp"

#include <bit>
#include <string>

#include "bgop/error.hpp"

namespace bgop::stream {
namespace {

int floor_power_of_two(int v) { return static_cast<int>(std::bit_floor(static_cast<unsigned>(v))); }

std::size_t payload_count(int gop_size, bool left_key_decoded) {
  if (gop_size == 0) return 1;
  std::size_t n = 0;
  for (const auto& u : gop::coding_schedule(gop_size, left_key_decoded).schedule) {
    n += u.kind == gop::UnitKind::intra ? 1 : 2;
  }
  return n;
}

gop::StreamKind expected_kind(int gop_size, bool left_key_decoded, std::size_t payload) {
  if (gop_size == 0) return gop::StreamKind::intra;
  std::size_t i = 0;
  for (const auto& u : gop::coding_schedule(gop_size, left_key_decoded).schedule) {
    if (u.kind == gop::UnitKind::intra) {
      if (i++ == payload) return gop::StreamKind::intra;
    } else {
      if (i++ == payload) return gop::StreamKind::flow;
      if (i++ == payload) return gop::StreamKind::residual;
    }
  }
  throw ContractError("payload index beyond schedule");
}

bitstream::SymbolRange range_of(const gop::LatentStream& s) {
  return {static_cast<std::int16_t>(s.min_symbol()), static_cast<std::int16_t>(s.max_symbol())};
}

Shape with_batch(Shape s) {
  s.n = 1;
  return s;
}

}  // namespace

std::vector<int> gop_partition(int frame_count, int gop_size) {
  if (frame_count < 1) throw DataError("a sequence needs at least one frame");
  if (gop_size < 1 || std::popcount(static_cast<unsigned>(gop_size)) != 1) {
    throw ConfigError("GOP size must be a power of 2, got " + std::to_string(gop_size));
  }
  if (frame_count == 1) return {0};
  std::vector<int> sizes;
  for (int remaining = frame_count - 1; remaining > 0;) {
    const int s = std::min(gop_size, floor_power_of_two(remaining));
    sizes.push_back(s);
    remaining -= s;
  }
  return sizes;
}

SequenceCoding encode_sequence(const std::vector<Tensor>& frames, const CodecModel& model,
                               int gop_size) {
  ag::NoGradGuard guard;
  const auto sizes = gop_partition(static_cast<int>(frames.size()), gop_size);
  const Shape fs = frames.front().shape();
  if (fs.n != 1) throw ShapeError("sequence frames must have batch 1, got " + fs.str());

  SequenceCoding out;
  out.gop_size = gop_size;
  out.width = fs.w;
  out.height = fs.h;
  out.model_id = model.config().model_id;
  out.reconstructed.reserve(frames.size());

  std::size_t start = 0;
  double sq_error = 0.0;
  for (const int size : sizes) {
    std::vector<Tensor> gop_frames(frames.begin() + static_cast<std::ptrdiff_t>(start),
                                   frames.begin() + static_cast<std::ptrdiff_t>(start + size + 1));
    gop::EncodeOptions options;
    options.mode = entropy::QuantizerMode::round;
    if (!out.reconstructed.empty()) options.decoded_left_key = out.reconstructed.back();
    gop::GopResult r = gop::encode_gop(gop_frames, model, options);
    out.estimated_bits.image += r.bits.image;
    out.estimated_bits.flow += r.bits.flow;
    out.estimated_bits.residual += r.bits.residual;
    const std::size_t first = out.reconstructed.empty() ? 0 : 1;
    for (std::size_t t = first; t < r.reconstructed.size(); ++t) {
      const Tensor& a = gop_frames[t];
      const Tensor& b = r.reconstructed[t];
      for (std::size_t i = 0; i < a.numel(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        sq_error += d * d;
      }
      out.reconstructed.push_back(std::move(r.reconstructed[t]));
    }
    out.gops.push_back(std::move(r.encoded));
    start += static_cast<std::size_t>(size);
  }
  out.mse = sq_error / (static_cast<double>(frames.size()) * static_cast<double>(fs.numel()));
  return out;
}

std::vector<Tensor> decode_sequence(const std::vector<gop::EncodedGop>& gops,
                                    const CodecModel& model) {
  std::vector<Tensor> frames;
  for (const auto& g : gops) {
    std::optional<Tensor> left;
    if (g.left_key_decoded) {
      if (frames.empty()) throw DecodeError("first GOP cannot reference a previous key", 0);
      left = frames.back();
    }
    auto decoded = gop::decode_gop(g, model, left);
    for (std::size_t t = g.left_key_decoded ? 1 : 0; t < decoded.size(); ++t) {
      frames.push_back(std::move(decoded[t]));
    }
  }
  return frames;
}

std::vector<std::int32_t> main_tables(const nn::CompressionNet& net, const gop::LatentStream& hyper,
                                      int symbol_min, int symbol_max) {
  const auto dist = gop::main_distribution(net, hyper);
  std::vector<std::int32_t> data;
  for (std::size_t i = 0; i < dist.mu.numel(); ++i) {
    const auto pmf = entropy::build_pmf_table({dist.mu[i], dist.scale[i]}, symbol_min, symbol_max);
    coder::append_table(data, entropy::quantize_pmf(pmf.probs, symbol_min));
  }
  return data;
}

std::vector<std::int32_t> hyper_tables(std::size_t count, int symbol_min, int symbol_max) {
  const auto pmf = entropy::build_pmf_table({0.0, 1.0}, symbol_min, symbol_max);
  std::vector<std::int32_t> data;
  coder::append_table(data, entropy::quantize_pmf(pmf.probs, symbol_min), count);
  return data;
}

std::vector<std::uint8_t> write_stream(const SequenceCoding& coding, const CodecModel& model,
                                       coder::SymbolCoder& coder) {
  if (coding.width > 0xFFFF || coding.height > 0xFFFF) {
    throw ConfigError("frame dims exceed the 16-bit header fields");
  }
  if (coding.gop_size > 0xFF) throw ConfigError("GOP size exceeds the 8-bit header field");
  bitstream::StreamHeader header;
  header.width = static_cast<std::uint16_t>(coding.width);
  header.height = static_cast<std::uint16_t>(coding.height);
  header.gop_size = static_cast<std::uint8_t>(coding.gop_size);
  header.model_id = static_cast<std::uint8_t>(coding.model_id);
  header.frame_count = static_cast<std::uint32_t>(coding.frame_count());

  std::vector<bitstream::Chunk> chunks;
  for (const auto& g : coding.gops) {
    for (const auto& p : g.payloads) {
      bitstream::Chunk c;
      c.unit_kind = static_cast<std::uint8_t>(p.kind);
      c.main_range = range_of(p.main);
      c.hyper_range = range_of(p.hyper);
      c.hyper_payload = coder.encode(
          p.hyper.symbols,
          hyper_tables(p.hyper.symbols.size(), c.hyper_range.min, c.hyper_range.max));
      c.main_payload = coder.encode(
          p.main.symbols, main_tables(gop::net_for(model, p.kind), p.hyper, c.main_range.min,
                                      c.main_range.max));
      chunks.push_back(std::move(c));
    }
  }
  return bitstream::write_container(header, chunks);
}

ParsedStream read_stream(std::span<const std::uint8_t> bytes, const CodecModel& model,
                         coder::SymbolCoder& coder) {
  auto container = bitstream::read_container(bytes);
  ParsedStream out;
  out.header = container.header;
  const auto& h = container.header;
  if (h.model_id != model.config().model_id) {
    throw DecodeError("stream needs model id " + std::to_string(h.model_id) + ", loaded model is " +
                          std::to_string(model.config().model_id),
                      0);
  }
  const int align = model.config().alignment();
  if (h.width == 0 || h.height == 0 || h.width % align != 0 || h.height % align != 0) {
    throw DecodeError("frame dims " + std::to_string(h.width) + "x" + std::to_string(h.height) +
                          " are not multiples of " + std::to_string(align),
                      0);
  }
  std::vector<int> sizes;
  try {
    sizes = gop_partition(static_cast<int>(h.frame_count), h.gop_size);
  } catch (const Error& e) {
    throw DecodeError(std::string("invalid header: ") + e.what(), 0);
  }
  const Shape main = with_batch(gop::main_latent_shape(model.config(), h.height, h.width));
  const Shape hyper = with_batch(gop::hyper_latent_shape(model.config(), h.height, h.width));

  std::size_t chunk = 0;
  for (std::size_t g = 0; g < sizes.size(); ++g) {
    gop::EncodedGop eg;
    eg.width = h.width;
    eg.height = h.height;
    eg.gop_size = sizes[g];
    eg.model_id = h.model_id;
    eg.left_key_decoded = g > 0;
    const std::size_t count = payload_count(eg.gop_size, eg.left_key_decoded);
    for (std::size_t p = 0; p < count; ++p, ++chunk) {
      if (chunk >= container.chunks.size()) throw DecodeError("stream ends early", chunk);
      const auto& c = container.chunks[chunk];
      gop::CodedLatent latent;
      latent.kind = static_cast<gop::StreamKind>(c.unit_kind);
      if (latent.kind != expected_kind(eg.gop_size, eg.left_key_decoded, p)) {
        throw DecodeError("unit kind " + std::to_string(c.unit_kind) + " out of schedule order",
                          chunk);
      }
      try {
        latent.hyper.shape = hyper;
        latent.hyper.symbols =
            coder.decode(c.hyper_payload,
                         hyper_tables(hyper.numel(), c.hyper_range.min, c.hyper_range.max),
                         hyper.numel());
        latent.main.shape = main;
        latent.main.symbols = coder.decode(
            c.main_payload,
            main_tables(gop::net_for(model, latent.kind), latent.hyper, c.main_range.min,
                        c.main_range.max),
            main.numel());
      } catch (const coder::CoderFailure& e) {
        throw DecodeError(e.what(), chunk);
      }
      out.chunk_bytes.push_back(c.main_payload.size() + c.hyper_payload.size());
      eg.payloads.push_back(std::move(latent));
    }
    out.gops.push_back(std::move(eg));
  }
  if (chunk != container.chunks.size()) throw DecodeError("unexpected trailing chunks", chunk);
  return out;
}

std::vector<Tensor> decode_stream(std::span<const std::uint8_t> bytes, const CodecModel& model,
                                  coder::SymbolCoder& coder) {
  return decode_sequence(read_stream(bytes, model, coder).gops, model);
}

}  // namespace bgop::stream
