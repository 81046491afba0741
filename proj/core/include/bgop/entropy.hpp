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
#include <random>
#include <span>
#include <vector>

#include "bgop/autograd.hpp"

namespace bgop::entropy {

/// Lower bound on every Laplace scale (latent units).
inline constexpr float kScaleFloor = 0.01f;
/// Lower bound on a bin probability inside the log.
inline constexpr double kProbFloor = 1e-9;
/// Total of a quantized frequency table.
inline constexpr std::uint32_t kFrequencyTotal = 1u << 16;

/// noise: additive U(-0.5, 0.5) (training); round: hard rounding (inference).
enum class QuantizerMode { noise, round };

struct LaplaceParams {
  double mu = 0.0;
  double b = 1.0;
};

struct RateEstimate {
  double bits = 0.0;
};

/// Discrete distribution over [symbol_min, symbol_max] with tails folded in.
struct PmfTable {
  int symbol_min = 0;
  int symbol_max = 0;
  std::vector<double> probs;
};

/// Integer cumulative frequencies, cum_freq.front() == 0, cum_freq.back() == 65536.
struct CdfTable {
  int symbol_min = 0;
  int symbol_max = 0;
  std::vector<std::uint32_t> cum_freq;

  std::uint32_t frequency(int symbol) const {
    const auto i = static_cast<std::size_t>(symbol - symbol_min);
    return cum_freq[i + 1] - cum_freq[i];
  }
};

/// Ties round away from zero (-0.5 -> -1, 0.5 -> 1).
double round_half_away(double v);

/// Noise mode draws from `rng`; the result passes gradients straight through.
/// Round mode returns a constant (no gradient).
ag::Var quantize(const ag::Var& y, QuantizerMode mode, std::mt19937_64& rng);
Tensor quantize_values(const Tensor& y, QuantizerMode mode, std::mt19937_64& rng);

/// F(k + 0.5) - F(k - 0.5) under Laplace(mu, max(b, kScaleFloor)).
double laplace_bin_prob(double k, LaplaceParams params);

RateEstimate rate_bits(const Tensor& y_hat, const Tensor& mu, const Tensor& b);
/// Differentiable with respect to all three inputs.
ag::Var rate_bits(const ag::Var& y_hat, const ag::Var& mu, const ag::Var& b);

/// Rate under a unit Laplace (mu = 0, b = 1) for every element.
RateEstimate hyper_rate_bits(const Tensor& z_hat);
ag::Var hyper_rate_bits(const ag::Var& z_hat);

/// Bin probabilities over [symbol_min, symbol_max] with both tails folded into
/// the boundary symbols so the table sums to one.
PmfTable build_pmf_table(LaplaceParams params, int symbol_min, int symbol_max);

/// 16-bit largest-remainder apportionment of a pmf; every symbol keeps a
/// frequency of at least one and ties favor the lower index.
CdfTable quantize_pmf(std::span<const double> probs, int symbol_min = 0);

/// Code length in bits of `symbol` under a quantized table.
double table_bits(const CdfTable& table, int symbol);

}  // namespace bgop::entropy
