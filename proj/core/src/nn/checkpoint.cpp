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

#include "bgop/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "bgop/error.hpp"

namespace bgop::nn {
namespace {

constexpr char kMagic[4] = {'B', 'G', 'C', 'K'};

class Writer {
 public:
  void bytes(const void* p, std::size_t n) {
    const auto* b = static_cast<const std::uint8_t*>(p);
    out_.insert(out_.end(), b, b + n);
  }
  template <class U>
  void uint(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f32(float v) { uint(std::bit_cast<std::uint32_t>(v)); }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw ConfigError("checkpoint truncated at byte " + std::to_string(pos_));
  }
  template <class U>
  U uint() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(in_[pos_++]) << (8 * i);
    return v;
  }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(in_.begin() + pos_, in_.begin() + pos_ + n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == in_.size(); }

 private:
  const std::vector<std::uint8_t>& in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> serialize_checkpoint(const Module& module, const nlohmann::json& config) {
  Writer w;
  w.bytes(kMagic, 4);
  w.uint<std::uint32_t>(kCheckpointVersion);
  const std::string cfg = config.dump();
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(cfg.size()));
  w.bytes(cfg.data(), cfg.size());
  const auto params = module.parameters();
  w.uint<std::uint32_t>(static_cast<std::uint32_t>(params.size()));
  for (const auto& p : params) {
    w.uint<std::uint16_t>(static_cast<std::uint16_t>(p.name.size()));
    w.bytes(p.name.data(), p.name.size());
    w.uint<std::uint8_t>(0);
    w.uint<std::uint8_t>(4);
    const Shape& s = p.var.shape();
    for (int d : {s.n, s.c, s.h, s.w}) w.uint<std::uint32_t>(static_cast<std::uint32_t>(d));
    for (float v : p.var.value().data()) w.f32(v);
  }
  return w.take();
}

Checkpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  if (r.str(4) != std::string(kMagic, 4)) throw ConfigError("not a checkpoint (bad magic)");
  const auto version = r.uint<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw ConfigError("unsupported checkpoint version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config = nlohmann::json::parse(r.str(r.uint<std::uint32_t>()));
  const auto count = r.uint<std::uint32_t>();
  for (std::uint32_t e = 0; e < count; ++e) {
    std::string key = r.str(r.uint<std::uint16_t>());
    if (r.uint<std::uint8_t>() != 0) throw ConfigError("unsupported dtype for " + key);
    const auto ndim = r.uint<std::uint8_t>();
    if (ndim < 1 || ndim > 4) throw ConfigError("unsupported rank for " + key);
    int dims[4] = {1, 1, 1, 1};
    for (int d = 0; d < ndim; ++d) dims[4 - ndim + d] = static_cast<int>(r.uint<std::uint32_t>());
    Tensor t(Shape{dims[0], dims[1], dims[2], dims[3]});
    for (auto& v : t.data()) v = r.f32();
    ck.tensors.emplace(std::move(key), std::move(t));
  }
  if (!r.done()) throw ConfigError("trailing bytes after checkpoint entries");
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const Module& module,
                     const nlohmann::json& config) {
  const auto bytes = serialize_checkpoint(module, config);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write checkpoint " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_checkpoint(bytes);
}

void load_weights(Module& module, const Checkpoint& checkpoint) {
  for (auto& p : module.parameters()) {
    auto it = checkpoint.tensors.find(p.name);
    if (it == checkpoint.tensors.end()) throw ConfigError("checkpoint lacks parameter " + p.name);
    if (!(it->second.shape() == p.var.shape())) {
      throw ConfigError("checkpoint shape mismatch for " + p.name + ": " +
                        it->second.shape().str() + " vs " + p.var.shape().str());
    }
    if (!it->second.all_finite()) throw ConfigError("non-finite values in " + p.name);
    p.var.mutable_value() = it->second;
  }
}

void save_model(const std::filesystem::path& path, const CodecModel& model) {
  save_checkpoint(path, model, nlohmann::json(model.config()));
}

std::unique_ptr<CodecModel> load_model(const std::filesystem::path& path) {
  const Checkpoint ck = read_checkpoint(path);
  auto model = std::make_unique<CodecModel>(ck.config.get<ModelConfig>());
  load_weights(*model, ck);
  return model;
}

}  // namespace bgop::nn
