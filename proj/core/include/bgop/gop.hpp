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
#include <optional>
#include <random>
#include <vector>

#include "bgop/autograd.hpp"
#include "bgop/entropy.hpp"
#include "bgop/model.hpp"

namespace bgop::gop {

enum class UnitKind : std::uint8_t { intra = 0, bidirectional = 1 };

struct CodingUnit {
  int target = 0;
  UnitKind kind = UnitKind::intra;
  int left_ref = -1;   // bidirectional only
  int right_ref = -1;  // bidirectional only
  bool operator==(const CodingUnit&) const = default;
};

struct GopStructure {
  int gop_size = 1;
  std::vector<CodingUnit> schedule;
};

/// Hierarchical order for a GOP of size N (a power of two): frames 0 and N are
/// intra, then each interval is bisected (N/2 from (0, N), quarters, ...).
/// With `left_key_decoded` frame 0 is taken from the previous GOP and not coded.
GopStructure coding_schedule(int gop_size, bool left_key_decoded = false);

/// Payload kind of one latent coding; values match the container's unit_kind byte.
enum class StreamKind : std::uint8_t { intra = 0, flow = 1, residual = 2 };

/// Integer symbols of one latent tensor.
struct LatentStream {
  Shape shape{};
  std::vector<std::int32_t> symbols;

  std::int32_t min_symbol() const;
  std::int32_t max_symbol() const;
};

struct CodedLatent {
  StreamKind kind = StreamKind::intra;
  LatentStream main;
  LatentStream hyper;
};

/// Round-mode output of encode_gop: everything the decoder needs besides weights.
struct EncodedGop {
  int width = 0;
  int height = 0;
  int gop_size = 1;
  int model_id = 0;
  bool left_key_decoded = false;
  std::vector<CodedLatent> payloads;  // schedule order; one per intra unit, two per B unit
};

/// Rates are bits per pixel of the coded frames; D is the mean squared error over
/// every coded frame, channel and pixel. L = lambda * D + R_image + R_flow + R_residual.
struct LossBreakdown {
  double lambda = 0.0;
  double D = 0.0;
  double R_image = 0.0;
  double R_flow = 0.0;
  double R_residual = 0.0;
  double L = 0.0;
};

/// Bits per category before normalization.
struct RateBits {
  double image = 0.0;
  double flow = 0.0;
  double residual = 0.0;
  double total() const { return image + flow + residual; }
};

/// Throws ContractError on negative inputs.
LossBreakdown rd_loss(double distortion, double r_image, double r_flow, double r_residual,
                      double lambda);

struct GopResult {
  EncodedGop encoded;                 // filled in round mode
  std::vector<Tensor> reconstructed;  // frames 0..N (post-processed)
  RateBits bits;
  LossBreakdown loss;
  ag::Var loss_var;  // scalar graph root for training
};

struct EncodeOptions {
  entropy::QuantizerMode mode = entropy::QuantizerMode::round;
  double lambda = 256.0;
  std::uint64_t noise_seed = 0;
  /// Reconstruction of frame 0 from the previous GOP, which then is not coded again.
  std::optional<Tensor> decoded_left_key;
};

/// Largest symbol magnitude written to a stream; rounded latents are clamped to it.
inline constexpr int kSymbolLimit = 511;

/// Codes frames 0..N (N + 1 tensors of shape Bx3xHxW) through the hierarchical
/// closed loop. Every reference is the post-processed reconstruction.
GopResult encode_gop(const std::vector<Tensor>& frames, const CodecModel& model,
                     const EncodeOptions& options);

/// Rebuilds the encoder-side reconstruction from symbols alone.
std::vector<Tensor> decode_gop(const EncodedGop& encoded, const CodecModel& model,
                               const std::optional<Tensor>& decoded_left_key = std::nullopt);

/// Latent extents produced for a frame of the given size.
Shape main_latent_shape(const ModelConfig& config, int height, int width);
Shape hyper_latent_shape(const ModelConfig& config, int height, int width);

/// Per-element Laplace parameters the decoder derives from a hyper stream.
struct LatentDistribution {
  Tensor mu;
  Tensor scale;
};
LatentDistribution main_distribution(const nn::CompressionNet& net, const LatentStream& hyper);

/// Entropy-model bits of one coded latent (main under its conditional Laplace,
/// hyper under the unit Laplace).
double estimated_bits(const nn::CompressionNet& net, const CodedLatent& coded);

/// One pass through a compression net: analysis, hyper analysis, quantization,
/// rate and synthesis. In round mode latents are clamped to +-kSymbolLimit and
/// `coded` holds their symbols.
struct LatentCoding {
  ag::Var decoded;
  ag::Var bits;  // main under the conditional Laplace plus hyper under the unit Laplace
  CodedLatent coded;
};
LatentCoding code_latent(const nn::CompressionNet& net, const ag::Var& input, StreamKind kind,
                         entropy::QuantizerMode mode, std::mt19937_64& rng);

/// The compression net that produced a payload of the given kind.
const nn::CompressionNet& net_for(const CodecModel& model, StreamKind kind);

}  // namespace bgop::gop
