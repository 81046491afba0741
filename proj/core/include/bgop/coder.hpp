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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bgop/entropy.hpp"
#include "bgop/error.hpp"

namespace bgop::coder {

/// Environment variable naming the range coder shared library.
inline constexpr const char* kLibraryEnv = "BGOP_RANGECODER_LIB";
inline constexpr const char* kDefaultLibrary = "libbgop_rangecoder.so";

/// Non-zero status returned across the boundary.
class CoderFailure : public Error {
 public:
  CoderFailure(const std::string& what, int status, std::size_t symbol_index)
      : Error(what), status_(status), symbol_index_(symbol_index) {}
  int status() const noexcept { return status_; }
  std::size_t symbol_index() const noexcept { return symbol_index_; }

 private:
  int status_;
  std::size_t symbol_index_;
};

/// Flattens per-symbol tables into the boundary's int32 record layout.
std::vector<std::int32_t> pack_tables(std::span<const entropy::CdfTable> tables);
/// Appends `repeat` copies of one table.
void append_table(std::vector<std::int32_t>& out, const entropy::CdfTable& table,
                  std::size_t repeat = 1);

class SymbolCoder {
 public:
  virtual ~SymbolCoder() = default;
  virtual std::vector<std::uint8_t> encode(std::span<const std::int32_t> symbols,
                                           std::span<const std::int32_t> table_data) = 0;
  virtual std::vector<std::int32_t> decode(std::span<const std::uint8_t> bytes,
                                           std::span<const std::int32_t> table_data,
                                           std::size_t count) = 0;
};

/// Range coder loaded from a shared library at run time.
class DynamicCoder final : public SymbolCoder {
 public:
  /// Throws EnvironmentError if the library or one of its symbols is missing.
  explicit DynamicCoder(const std::string& library);
  ~DynamicCoder() override;
  DynamicCoder(const DynamicCoder&) = delete;
  DynamicCoder& operator=(const DynamicCoder&) = delete;

  std::vector<std::uint8_t> encode(std::span<const std::int32_t> symbols,
                                   std::span<const std::int32_t> table_data) override;
  std::vector<std::int32_t> decode(std::span<const std::uint8_t> bytes,
                                   std::span<const std::int32_t> table_data,
                                   std::size_t count) override;
  const std::string& library() const { return library_; }

 private:
  struct Api;
  std::string library_;
  void* handle_ = nullptr;
  std::unique_ptr<Api> api_;
};

/// Library path from the environment, or the default soname.
std::string configured_library();

/// Loads `library`, or configured_library() when empty.
std::unique_ptr<SymbolCoder> load_coder(const std::optional<std::string>& library = std::nullopt);

}  // namespace bgop::coder
