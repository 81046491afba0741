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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bgop {

/// Base class for every error raised by the codec library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: non power-of-two GOP, empty span, bad hyperparameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor shape or divisibility contract violated.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Caller broke a documented precondition (negative rate, out-of-range symbol).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Input data could not be ingested (unreadable image, inconsistent dims).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A required external component (codec binary, coder library) is missing.
class EnvironmentError : public Error {
 public:
  using Error::Error;
};

/// Malformed container bytes. Carries the byte offset where parsing failed.
class ContainerError : public Error {
 public:
  ContainerError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Payload could not be decoded. Carries the index of the failing coding unit.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t unit)
      : Error("unit " + std::to_string(unit) + ": " + what), unit_(unit) {}
  std::size_t unit() const noexcept { return unit_; }

 private:
  std::size_t unit_;
};

}  // namespace bgop
