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

#include "bgop/bitstream.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "bgop/error.hpp"

namespace bgop::bitstream {
namespace {

constexpr std::uint8_t kMaxUnitKind = 2;

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    u8(static_cast<std::uint8_t>(v >> 8));
    u8(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    u16(static_cast<std::uint16_t>(v >> 16));
    u16(static_cast<std::uint16_t>(v));
  }
  void i16(std::int16_t v) { u16(static_cast<std::uint16_t>(v)); }
  void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  std::size_t offset() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }
  void need(std::size_t n, const char* what) const {
    if (in_.size() - pos_ < n) {
      throw ContainerError(std::string("truncated ") + what, pos_);
    }
  }
  std::uint8_t u8(const char* what) {
    need(1, what);
    return in_[pos_++];
  }
  std::uint16_t u16(const char* what) {
    need(2, what);
    const auto v = static_cast<std::uint16_t>((in_[pos_] << 8) | in_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | in_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::int16_t i16(const char* what) { return static_cast<std::int16_t>(u16(what)); }
  std::vector<std::uint8_t> bytes(std::size_t n, const char* what) {
    need(n, what);
    std::vector<std::uint8_t> out(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                  in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint32_t payload_length(const std::vector<std::uint8_t>& p) {
  if (p.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ContractError("chunk payload exceeds 4 GiB");
  }
  return static_cast<std::uint32_t>(p.size());
}

}  // namespace

std::vector<std::uint8_t> write_container(const StreamHeader& header, std::span<const Chunk> chunks) {
  Writer w;
  w.bytes(kMagic);
  w.u8(header.version);
  w.u16(header.width);
  w.u16(header.height);
  w.u8(header.gop_size);
  w.u8(header.model_id);
  w.u32(header.frame_count);
  for (const Chunk& c : chunks) {
    if (c.unit_kind > kMaxUnitKind) {
      throw ContractError("unknown unit kind " + std::to_string(c.unit_kind));
    }
    if (c.main_range.min > c.main_range.max || c.hyper_range.min > c.hyper_range.max) {
      throw ContractError("inverted symbol range");
    }
    w.u8(c.unit_kind);
    w.u32(payload_length(c.main_payload));
    w.u32(payload_length(c.hyper_payload));
    w.i16(c.main_range.min);
    w.i16(c.main_range.max);
    w.i16(c.hyper_range.min);
    w.i16(c.hyper_range.max);
    w.bytes(c.main_payload);
    w.bytes(c.hyper_payload);
  }
  return w.take();
}

Container read_container(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw ContainerError("bad magic", 0);
  }
  r.bytes(kMagic.size(), "magic");
  Container out;
  StreamHeader& h = out.header;
  const std::size_t version_at = r.offset();
  h.version = r.u8("version");
  if (h.version != kVersion) {
    throw ContainerError("unsupported version " + std::to_string(h.version), version_at);
  }
  h.width = r.u16("width");
  h.height = r.u16("height");
  h.gop_size = r.u8("gop_size");
  h.model_id = r.u8("model_id");
  h.frame_count = r.u32("frame_count");

  while (!r.done()) {
    Chunk c;
    const std::size_t kind_at = r.offset();
    c.unit_kind = r.u8("unit_kind");
    if (c.unit_kind > kMaxUnitKind) {
      throw ContainerError("unknown unit kind " + std::to_string(c.unit_kind), kind_at);
    }
    const std::uint32_t main_len = r.u32("main_len");
    const std::uint32_t hyper_len = r.u32("hyper_len");
    const std::size_t range_at = r.offset();
    c.main_range = {r.i16("main_min"), r.i16("main_max")};
    c.hyper_range = {r.i16("hyper_min"), r.i16("hyper_max")};
    if (c.main_range.min > c.main_range.max || c.hyper_range.min > c.hyper_range.max) {
      throw ContainerError("inverted symbol range", range_at);
    }
    c.main_payload = r.bytes(main_len, "main payload");
    c.hyper_payload = r.bytes(hyper_len, "hyper payload");
    out.chunks.push_back(std::move(c));
  }
  return out;
}

}  // namespace bgop::bitstream
