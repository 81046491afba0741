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

#include "bgop/gop.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <string>

#include "bgop/error.hpp"
#include "bgop/motion.hpp"
#include "bgop/ops.hpp"

namespace bgop::gop {
namespace {

using ag::Var;
using InputFn = std::function<Var()>;
// Codes one input (computed lazily; the decoder never calls it) and returns the
// decoded tensor that both sides continue from.
using CodeFn = std::function<Var(StreamKind, const InputFn&)>;

bool is_power_of_two(int n) { return n >= 1 && (n & (n - 1)) == 0; }

// Schedule for a single key frame with no following frames.
GopStructure single_frame_schedule() {
  GopStructure gs;
  gs.gop_size = 0;
  gs.schedule.push_back({0, UnitKind::intra, -1, -1});
  return gs;
}

GopStructure schedule_for(int gop_size, bool left_key_decoded) {
  return gop_size == 0 ? single_frame_schedule() : coding_schedule(gop_size, left_key_decoded);
}

// The hierarchical closed loop shared by encoder and decoder. Returns the
// post-processed reconstruction of every frame 0..N.
std::vector<Var> run_closed_loop(const GopStructure& gs, const CodecModel& model,
                                 const CodeFn& code, const std::function<Var(int)>& original,
                                 const std::optional<Var>& left_key) {
  std::vector<Var> recon(static_cast<std::size_t>(gs.gop_size) + 1);
  if (left_key) recon[0] = *left_key;
  for (const auto& unit : gs.schedule) {
    const int t = unit.target;
    if (unit.kind == UnitKind::intra) {
      Var decoded = code(StreamKind::intra, [&] { return original(t); });
      recon[t] = model.postproc()(decoded);
      continue;
    }
    const Var past = recon[unit.left_ref];
    const Var future = recon[unit.right_ref];
    Var flow_hat = code(StreamKind::flow, [&] {
      return motion::estimate_bidirectional_flow(past, future, original(t), model.flow_net())
          .packed();
    });
    const auto comp = motion::motion_compensate(past, future, motion::FlowPair::unpack(flow_hat),
                                                model.mask_net());
    Var residual_hat = code(StreamKind::residual,
                            [&] { return ops::sub(original(t), comp.prediction); });
    recon[t] = model.postproc()(ops::add(comp.prediction, residual_hat));
  }
  return recon;
}

Tensor clamp_round(const Tensor& t) {
  Tensor out(t.shape());
  for (std::size_t i = 0; i < t.numel(); ++i) {
    const double r = entropy::round_half_away(t[i]);
    out[i] = static_cast<float>(std::clamp(r, -static_cast<double>(kSymbolLimit),
                                           static_cast<double>(kSymbolLimit)));
  }
  return out;
}

LatentStream to_stream(const Tensor& t) {
  LatentStream s;
  s.shape = t.shape();
  s.symbols.reserve(t.numel());
  for (float v : t.data()) s.symbols.push_back(static_cast<std::int32_t>(v));
  return s;
}

Tensor from_stream(const LatentStream& s) {
  if (s.symbols.size() != s.shape.numel()) {
    throw ShapeError("latent stream holds " + std::to_string(s.symbols.size()) +
                     " symbols for shape " + s.shape.str());
  }
  Tensor t(s.shape);
  for (std::size_t i = 0; i < s.symbols.size(); ++i) t[i] = static_cast<float>(s.symbols[i]);
  return t;
}

bool is_round(const EncodeOptions& o) { return o.mode == entropy::QuantizerMode::round; }

}  // namespace

GopStructure coding_schedule(int gop_size, bool left_key_decoded) {
  if (!is_power_of_two(gop_size)) {
    throw ConfigError("GOP size must be a power of 2, got " + std::to_string(gop_size));
  }
  GopStructure gs;
  gs.gop_size = gop_size;
  if (!left_key_decoded) gs.schedule.push_back({0, UnitKind::intra, -1, -1});
  gs.schedule.push_back({gop_size, UnitKind::intra, -1, -1});
  std::deque<std::pair<int, int>> intervals{{0, gop_size}};
  while (!intervals.empty()) {
    const auto [left, right] = intervals.front();
    intervals.pop_front();
    if (right - left < 2) continue;
    const int mid = (left + right) / 2;
    gs.schedule.push_back({mid, UnitKind::bidirectional, left, right});
    intervals.emplace_back(left, mid);
    intervals.emplace_back(mid, right);
  }
  return gs;
}

std::int32_t LatentStream::min_symbol() const {
  return symbols.empty() ? 0 : *std::min_element(symbols.begin(), symbols.end());
}

std::int32_t LatentStream::max_symbol() const {
  return symbols.empty() ? 0 : *std::max_element(symbols.begin(), symbols.end());
}

LossBreakdown rd_loss(double distortion, double r_image, double r_flow, double r_residual,
                      double lambda) {
  if (distortion < 0 || r_image < 0 || r_flow < 0 || r_residual < 0) {
    throw ContractError("rd_loss: distortion and rates must be nonnegative");
  }
  if (lambda < 0) throw ContractError("rd_loss: lambda must be nonnegative");
  LossBreakdown b;
  b.lambda = lambda;
  b.D = distortion;
  b.R_image = r_image;
  b.R_flow = r_flow;
  b.R_residual = r_residual;
  b.L = lambda * distortion + r_image + r_flow + r_residual;
  return b;
}

LatentCoding code_latent(const nn::CompressionNet& net, const Var& input, StreamKind kind,
                         entropy::QuantizerMode mode, std::mt19937_64& rng) {
  net.check_input(input.shape());
  const Var y = net.analysis()(input);
  const Var z = net.hyper_analysis()(y);
  LatentCoding out;
  out.coded.kind = kind;
  Var y_hat, z_hat;
  if (mode == entropy::QuantizerMode::round) {
    z_hat = Var(clamp_round(z.value()));
    y_hat = Var(clamp_round(y.value()));
    out.coded.main = to_stream(y_hat.value());
    out.coded.hyper = to_stream(z_hat.value());
  } else {
    z_hat = entropy::quantize(z, mode, rng);
    y_hat = entropy::quantize(y, mode, rng);
  }
  const auto field = net.hyper_synthesis()(z_hat);
  out.bits = ops::add(entropy::rate_bits(y_hat, field.mu, field.scale),
                      entropy::hyper_rate_bits(z_hat));
  out.decoded = net.synthesis()(y_hat);
  return out;
}

const nn::CompressionNet& net_for(const CodecModel& model, StreamKind kind) {
  switch (kind) {
    case StreamKind::intra:
      return model.image_codec();
    case StreamKind::flow:
      return model.flow_codec();
    case StreamKind::residual:
      return model.residual_codec();
  }
  throw ContractError("unknown stream kind");
}

Shape main_latent_shape(const ModelConfig& config, int height, int width) {
  const int f = 1 << config.down_layers;
  return Shape{1, config.latent_channels, height / f, width / f};
}

Shape hyper_latent_shape(const ModelConfig& config, int height, int width) {
  const int f = 1 << (config.down_layers + config.hyper_down_layers);
  return Shape{1, config.hyper_channels, height / f, width / f};
}

LatentDistribution main_distribution(const nn::CompressionNet& net, const LatentStream& hyper) {
  ag::NoGradGuard guard;
  const auto field = net.hyper_synthesis()(Var(from_stream(hyper)));
  return {field.mu.value(), field.scale.value()};
}

double estimated_bits(const nn::CompressionNet& net, const CodedLatent& coded) {
  const auto dist = main_distribution(net, coded.hyper);
  return entropy::rate_bits(from_stream(coded.main), dist.mu, dist.scale).bits +
         entropy::hyper_rate_bits(from_stream(coded.hyper)).bits;
}

GopResult encode_gop(const std::vector<Tensor>& frames, const CodecModel& model,
                     const EncodeOptions& options) {
  if (frames.empty()) throw ContractError("encode_gop: no frames");
  const int n = static_cast<int>(frames.size()) - 1;
  const Shape fs = frames.front().shape();
  for (const auto& f : frames) require_same_shape(f.shape(), fs, "encode_gop frames");
  if (fs.c != 3) throw ShapeError("encode_gop expects RGB frames, got " + fs.str());
  const int align = model.config().alignment();
  if (fs.h % align != 0 || fs.w % align != 0) {
    throw ShapeError("frame dims " + fs.str() + " must be divisible by " + std::to_string(align));
  }
  if (options.decoded_left_key) {
    require_same_shape(options.decoded_left_key->shape(), fs, "decoded left key");
    if (n == 0) throw ContractError("a decoded left key needs at least one more frame");
  }
  const GopStructure gs = schedule_for(n, options.decoded_left_key.has_value());

  std::mt19937_64 rng(options.noise_seed);
  GopResult result;
  result.encoded.width = fs.w;
  result.encoded.height = fs.h;
  result.encoded.gop_size = n;
  result.encoded.model_id = model.config().model_id;
  result.encoded.left_key_decoded = options.decoded_left_key.has_value();

  std::vector<Var> image_bits, flow_bits, residual_bits;
  const CodeFn code = [&](StreamKind kind, const InputFn& input_fn) -> Var {
    LatentCoding c = code_latent(net_for(model, kind), input_fn(), kind, options.mode, rng);
    if (is_round(options)) result.encoded.payloads.push_back(std::move(c.coded));
    (kind == StreamKind::intra ? image_bits : kind == StreamKind::flow ? flow_bits : residual_bits)
        .push_back(c.bits);
    return c.decoded;
  };

  std::vector<Var> originals;
  originals.reserve(frames.size());
  for (const auto& f : frames) originals.emplace_back(f);
  std::optional<Var> left_key;
  if (options.decoded_left_key) left_key = Var(*options.decoded_left_key);

  const std::vector<Var> recon = run_closed_loop(
      gs, model, code, [&](int t) { return originals[t]; }, left_key);

  // Distortion over the frames coded by this GOP.
  const int first = options.decoded_left_key ? 1 : 0;
  std::vector<Var> distortions;
  for (int t = first; t <= n; ++t) distortions.push_back(ops::mse(originals[t], recon[t]));
  const double coded_pixels =
      static_cast<double>(fs.n) * static_cast<double>(distortions.size()) * fs.h * fs.w;

  std::vector<Var> terms;
  std::vector<float> weights;
  const float inv_frames = 1.0f / static_cast<float>(distortions.size());
  for (const auto& d : distortions) {
    terms.push_back(d);
    weights.push_back(static_cast<float>(options.lambda) * inv_frames);
  }
  double distortion = 0.0;
  for (const auto& d : distortions) distortion += d.value()[0];
  distortion /= static_cast<double>(distortions.size());

  auto accumulate = [&](const std::vector<Var>& bits, double& total) {
    for (const auto& b : bits) {
      terms.push_back(b);
      weights.push_back(static_cast<float>(1.0 / coded_pixels));
      total += b.value()[0];
    }
  };
  accumulate(image_bits, result.bits.image);
  accumulate(flow_bits, result.bits.flow);
  accumulate(residual_bits, result.bits.residual);

  result.loss_var = ops::linear_combination(terms, weights);
  result.loss = rd_loss(distortion, result.bits.image / coded_pixels,
                        result.bits.flow / coded_pixels, result.bits.residual / coded_pixels,
                        options.lambda);
  result.reconstructed.reserve(recon.size());
  for (const auto& r : recon) result.reconstructed.push_back(r.value());
  return result;
}

std::vector<Tensor> decode_gop(const EncodedGop& encoded, const CodecModel& model,
                               const std::optional<Tensor>& decoded_left_key) {
  ag::NoGradGuard guard;
  if (encoded.model_id != model.config().model_id) {
    throw DecodeError("stream model id " + std::to_string(encoded.model_id) +
                          " does not match model " + std::to_string(model.config().model_id),
                      0);
  }
  if (encoded.left_key_decoded != decoded_left_key.has_value()) {
    throw DecodeError("left key availability does not match the stream", 0);
  }
  const GopStructure gs = schedule_for(encoded.gop_size, encoded.left_key_decoded);
  const Shape main = main_latent_shape(model.config(), encoded.height, encoded.width);
  const Shape hyper = hyper_latent_shape(model.config(), encoded.height, encoded.width);

  std::size_t next = 0;
  const CodeFn code = [&](StreamKind kind, const InputFn&) -> Var {
    const std::size_t unit = next++;
    if (unit >= encoded.payloads.size()) throw DecodeError("missing payload", unit);
    const CodedLatent& p = encoded.payloads[unit];
    if (p.kind != kind) throw DecodeError("payload kind does not match the schedule", unit);
    if (p.main.shape.c != main.c || p.main.shape.h != main.h || p.main.shape.w != main.w ||
        p.main.symbols.size() != p.main.shape.numel()) {
      throw DecodeError("main latent has unexpected extent " + p.main.shape.str(), unit);
    }
    if (p.hyper.shape.c != hyper.c || p.hyper.shape.h != hyper.h ||
        p.hyper.shape.w != hyper.w || p.hyper.symbols.size() != p.hyper.shape.numel()) {
      throw DecodeError("hyper latent has unexpected extent " + p.hyper.shape.str(), unit);
    }
    return net_for(model, kind).synthesis()(Var(from_stream(p.main)));
  };

  std::optional<Var> left;
  if (decoded_left_key) left = Var(*decoded_left_key);
  const std::vector<Var> recon = run_closed_loop(
      gs, model, code,
      [](int) -> Var { throw ContractError("decoder has no access to original frames"); }, left);
  if (next != encoded.payloads.size()) {
    throw DecodeError("unexpected trailing payloads", next);
  }
  std::vector<Tensor> frames;
  frames.reserve(recon.size());
  for (const auto& r : recon) frames.push_back(r.value());
  return frames;
}

}  // namespace bgop::gop
