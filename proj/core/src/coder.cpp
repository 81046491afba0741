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

#include "bgop/coder.hpp"

#include <dlfcn.h>

#include <cstdlib>

#include "bgop/rangecoder_abi.h"

namespace bgop::coder {
namespace {

using VersionFn = decltype(&bgop_rc_abi_version);
using EncodeFn = decltype(&bgop_rc_encode);
using DecodeFn = decltype(&bgop_rc_decode);

const char* status_name(int status) {
  switch (status) {
    case BGOP_RC_INVALID_ARGUMENT:
      return "invalid argument";
    case BGOP_RC_SYMBOL_OUT_OF_RANGE:
      return "symbol out of range";
    case BGOP_RC_BUFFER_TOO_SMALL:
      return "output buffer too small";
    case BGOP_RC_DECODE_ERROR:
      return "corrupt or exhausted stream";
    default:
      return "unknown status";
  }
}

}  // namespace

struct DynamicCoder::Api {
  EncodeFn encode = nullptr;
  DecodeFn decode = nullptr;
};

void append_table(std::vector<std::int32_t>& out, const entropy::CdfTable& table,
                  std::size_t repeat) {
  const std::size_t expected = static_cast<std::size_t>(table.symbol_max - table.symbol_min) + 2;
  if (table.symbol_max < table.symbol_min || table.cum_freq.size() != expected) {
    throw ContractError("malformed frequency table");
  }
  out.reserve(out.size() + repeat * (expected + 2));
  for (std::size_t r = 0; r < repeat; ++r) {
    out.push_back(table.symbol_min);
    out.push_back(table.symbol_max);
    for (std::uint32_t c : table.cum_freq) out.push_back(static_cast<std::int32_t>(c));
  }
}

std::vector<std::int32_t> pack_tables(std::span<const entropy::CdfTable> tables) {
  std::vector<std::int32_t> out;
  for (const auto& t : tables) append_table(out, t);
  return out;
}

DynamicCoder::DynamicCoder(const std::string& library) : library_(library), api_(new Api) {
  handle_ = dlopen(library.c_str(), RTLD_NOW | RTLD_LOCAL);
  if (handle_ == nullptr) {
    const char* why = dlerror();
    throw EnvironmentError("cannot load range coder library '" + library +
                           "': " + (why ? why : "unknown error") + " (set " + kLibraryEnv + ")");
  }
  auto resolve = [&](const char* name) {
    void* sym = dlsym(handle_, name);
    if (sym == nullptr) {
      dlclose(handle_);
      handle_ = nullptr;
      throw EnvironmentError(library + " does not export " + name);
    }
    return sym;
  };
  auto version = reinterpret_cast<VersionFn>(resolve("bgop_rc_abi_version"));
  api_->encode = reinterpret_cast<EncodeFn>(resolve("bgop_rc_encode"));
  api_->decode = reinterpret_cast<DecodeFn>(resolve("bgop_rc_decode"));
  if (const int v = version(); v != BGOP_RC_ABI_VERSION) {
    dlclose(handle_);
    handle_ = nullptr;
    throw EnvironmentError(library + " implements ABI version " + std::to_string(v) +
                           ", expected " + std::to_string(BGOP_RC_ABI_VERSION));
  }
}

DynamicCoder::~DynamicCoder() {
  if (handle_ != nullptr) dlclose(handle_);
}

std::vector<std::uint8_t> DynamicCoder::encode(std::span<const std::int32_t> symbols,
                                               std::span<const std::int32_t> table_data) {
  // A 16-bit table never spends more than two bytes per symbol.
  std::vector<std::uint8_t> out(2 * symbols.size() + 64);
  for (;;) {
    std::size_t written = 0;
    std::size_t index = 0;
    const int status = api_->encode(symbols.data(), symbols.size(), table_data.data(),
                                    table_data.size(), out.data(), out.size(), &written, &index);
    if (status == BGOP_RC_BUFFER_TOO_SMALL) {
      out.resize(out.size() * 2);
      continue;
    }
    if (status != BGOP_RC_OK) {
      throw CoderFailure(std::string("range encode failed: ") + status_name(status) +
                             " at symbol " + std::to_string(index),
                         status, index);
    }
    out.resize(written);
    return out;
  }
}

std::vector<std::int32_t> DynamicCoder::decode(std::span<const std::uint8_t> bytes,
                                               std::span<const std::int32_t> table_data,
                                               std::size_t count) {
  std::vector<std::int32_t> out(count);
  std::size_t index = 0;
  const int status = api_->decode(bytes.data(), bytes.size(), table_data.data(), table_data.size(),
                                  count, out.data(), &index);
  if (status != BGOP_RC_OK) {
    throw CoderFailure(std::string("range decode failed: ") + status_name(status) +
                           " at symbol " + std::to_string(index),
                       status, index);
  }
  return out;
}

std::string configured_library() {
  const char* env = std::getenv(kLibraryEnv);
  return (env != nullptr && *env != '\0') ? std::string(env) : std::string(kDefaultLibrary);
}

std::unique_ptr<SymbolCoder> load_coder(const std::optional<std::string>& library) {
  return std::make_unique<DynamicCoder>(library && !library->empty() ? *library
                                                                     : configured_library());
}

}  // namespace bgop::coder
