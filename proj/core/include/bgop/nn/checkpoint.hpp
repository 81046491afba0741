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
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgop/model.hpp"
#include "bgop/nn/module.hpp"

// Weight archive, version 1. All integers and floats are little-endian.
//
//   magic       4 bytes  "BGCK"
//   version     u32      1
//   config_len  u32      length of the UTF-8 JSON config block
//   config      bytes
//   count       u32      number of entries
//   entry:
//     key_len   u16, key bytes
//     dtype     u8       0 = float32
//     ndim      u8
//     dims      ndim x u32
//     data      prod(dims) x float32
namespace bgop::nn {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  nlohmann::json config;
  std::map<std::string, Tensor> tensors;
};

std::vector<std::uint8_t> serialize_checkpoint(const Module& module, const nlohmann::json& config);
Checkpoint parse_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::filesystem::path& path, const Module& module,
                     const nlohmann::json& config);
Checkpoint read_checkpoint(const std::filesystem::path& path);

/// Copies every parameter of `module` from the archive. Missing keys or shape
/// mismatches throw ConfigError.
void load_weights(Module& module, const Checkpoint& checkpoint);

void save_model(const std::filesystem::path& path, const CodecModel& model);
std::unique_ptr<CodecModel> load_model(const std::filesystem::path& path);

}  // namespace bgop::nn
