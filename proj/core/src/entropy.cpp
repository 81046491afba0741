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

#include "bgop/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bgop/error.hpp"
#include "bgop/kernels.hpp"
#include "bgop/ops.hpp"

namespace bgop::entropy {

double round_half_away(double v) { return std::round(v); }

Tensor quantize_values(const Tensor& y, QuantizerMode mode, std::mt19937_64& rng) {
  Tensor out(y.shape());
  if (mode == QuantizerMode::round) {
    for (std::size_t i = 0; i < y.numel(); ++i) {
      out[i] = static_cast<float>(round_half_away(y[i]));
    }
  } else {
    std::uniform_real_distribution<float> noise(-0.5f, 0.5f);
    for (std::size_t i = 0; i < y.numel(); ++i) out[i] = y[i] + noise(rng);
  }
  return out;
}

ag::Var quantize(const ag::Var& y, QuantizerMode mode, std::mt19937_64& rng) {
  if (mode == QuantizerMode::round) return ag::Var(quantize_values(y.value(), mode, rng));
  Tensor noise(y.shape());
  std::uniform_real_distribution<float> dist(-0.5f, 0.5f);
  for (auto& v : noise.data()) v = dist(rng);
  return ops::add_constant(y, noise);
}

double laplace_bin_prob(double k, LaplaceParams params) {
  const double b = std::max(params.b, static_cast<double>(kScaleFloor));
  return std::exp(kernels::laplace_log_bin_prob(k, params.mu, b));
}

RateEstimate rate_bits(const Tensor& y_hat, const Tensor& mu, const Tensor& b) {
  require_same_shape(y_hat.shape(), mu.shape(), "rate_bits(mu)");
  require_same_shape(y_hat.shape(), b.shape(), "rate_bits(b)");
  double total = 0.0;
  for (std::size_t i = 0; i < y_hat.numel(); ++i) {
    const double scale = std::max(b[i], kScaleFloor);
    total += kernels::laplace_bits(y_hat[i], mu[i], scale, kProbFloor).bits;
  }
  return {total};
}

ag::Var rate_bits(const ag::Var& y_hat, const ag::Var& mu, const ag::Var& b) {
  return ops::laplace_rate_bits(y_hat, mu, b, kScaleFloor, kProbFloor);
}

RateEstimate hyper_rate_bits(const Tensor& z_hat) {
  double total = 0.0;
  for (float v : z_hat.data()) total += kernels::laplace_bits(v, 0.0, 1.0, kProbFloor).bits;
  return {total};
}

ag::Var hyper_rate_bits(const ag::Var& z_hat) {
  ag::Var mu(Tensor(z_hat.shape(), 0.0f));
  ag::Var b(Tensor(z_hat.shape(), 1.0f));
  return ops::laplace_rate_bits(z_hat, mu, b, kScaleFloor, kProbFloor);
}

namespace {

// P(X < x) for X ~ Laplace(mu, b).
double laplace_cdf(double x, double mu, double b) {
  const double u = x - mu;
  return u < 0 ? 0.5 * std::exp(u / b) : 1.0 - 0.5 * std::exp(-u / b);
}

// P(X >= x), evaluated without cancellation in the upper tail.
double laplace_upper_tail(double x, double mu, double b) {
  const double u = x - mu;
  return u >= 0 ? 0.5 * std::exp(-u / b) : 1.0 - 0.5 * std::exp(u / b);
}

}  // namespace

PmfTable build_pmf_table(LaplaceParams params, int symbol_min, int symbol_max) {
  if (symbol_max < symbol_min) throw ConfigError("empty pmf span");
  const double b = std::max(params.b, static_cast<double>(kScaleFloor));
  PmfTable table{symbol_min, symbol_max, {}};
  table.probs.resize(static_cast<std::size_t>(symbol_max - symbol_min) + 1);
  for (int k = symbol_min; k <= symbol_max; ++k) {
    table.probs[k - symbol_min] = laplace_bin_prob(k, {params.mu, b});
  }
  table.probs.front() += laplace_cdf(symbol_min - 0.5, params.mu, b);
  table.probs.back() += laplace_upper_tail(symbol_max + 0.5, params.mu, b);
  if (symbol_min == symbol_max) table.probs.front() = 1.0;
  // Absorb rounding so the table sums to one.
  const double total = std::accumulate(table.probs.begin(), table.probs.end(), 0.0);
  auto mode = std::max_element(table.probs.begin(), table.probs.end());
  *mode += 1.0 - total;
  return table;
}

CdfTable quantize_pmf(std::span<const double> probs, int symbol_min) {
  const std::size_t n = probs.size();
  if (n == 0) throw ConfigError("quantize_pmf: empty pmf");
  if (n > kFrequencyTotal) throw ConfigError("quantize_pmf: more than 65536 symbols");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0)) throw ContractError("quantize_pmf: negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ContractError("quantize_pmf: pmf does not sum to 1");

  // One count per symbol is reserved, the rest is apportioned by largest remainder.
  const double budget = static_cast<double>(kFrequencyTotal - n);
  std::vector<std::uint32_t> freq(n);
  std::vector<double> remainder(n);
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = probs[i] / total * budget;
    const double whole = std::floor(share);
    freq[i] = 1 + static_cast<std::uint32_t>(whole);
    remainder[i] = share - whole;
    assigned += freq[i];
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
  for (std::size_t i = 0; assigned < kFrequencyTotal; ++i, ++assigned) {
    ++freq[order[i % n]];
  }

  CdfTable table;
  table.symbol_min = symbol_min;
  table.symbol_max = symbol_min + static_cast<int>(n) - 1;
  table.cum_freq.resize(n + 1);
  table.cum_freq[0] = 0;
  for (std::size_t i = 0; i < n; ++i) table.cum_freq[i + 1] = table.cum_freq[i] + freq[i];
  return table;
}

double table_bits(const CdfTable& table, int symbol) {
  if (symbol < table.symbol_min || symbol > table.symbol_max) {
    throw ContractError("symbol outside table span");
  }
  return 16.0 - std::log2(static_cast<double>(table.frequency(symbol)));
}

}  // namespace bgop::entropy
