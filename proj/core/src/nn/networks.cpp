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

#include "bgop/nn/networks.hpp"

#include <array>
#include <string>

#include "bgop/error.hpp"
#include "bgop/ops.hpp"

namespace bgop::nn {
namespace {

constexpr int kTransformKernel = 5;
constexpr int kInnerKernel = 3;

void require_divisible(const Shape& s, int factor, const char* what) {
  if (s.h % factor != 0 || s.w % factor != 0) {
    throw ShapeError(std::string(what) + ": spatial dims of " + s.str() +
                     " must be divisible by " + std::to_string(factor));
  }
}

}  // namespace

void AutoencoderConfig::validate() const {
  if (input_channels < 1 || hidden_channels < 1 || latent_channels < 1 || hyper_channels < 1 ||
      down_layers < 1 || hyper_down_layers < 1) {
    throw ConfigError("autoencoder config: all channel and layer counts must be >= 1");
  }
}

AnalysisTransform::AnalysisTransform(const AutoencoderConfig& config, Rng& rng) : config_(config) {
  config.validate();
  for (int i = 0; i < config.down_layers; ++i) {
    const int in = i == 0 ? config.input_channels : config.hidden_channels;
    const int out = i + 1 == config.down_layers ? config.latent_channels : config.hidden_channels;
    convs_.push_back(std::make_unique<Conv2d>(in, out, kTransformKernel, 2, rng));
    register_module("conv" + std::to_string(i), *convs_.back());
    if (i + 1 < config.down_layers) {
      gdns_.push_back(std::make_unique<Gdn>(out, false));
      register_module("gdn" + std::to_string(i), *gdns_.back());
    }
  }
}

Var AnalysisTransform::operator()(const Var& x) const {
  require_divisible(x.shape(), 1 << config_.down_layers, "analysis transform");
  if (x.shape().c != config_.input_channels) {
    throw ShapeError("analysis transform expects " + std::to_string(config_.input_channels) +
                     " channels, got " + x.shape().str());
  }
  Var h = x;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    h = (*convs_[i])(h);
    if (i < gdns_.size()) h = (*gdns_[i])(h);
  }
  return h;
}

Shape AnalysisTransform::latent_shape(const Shape& input) const {
  require_divisible(input, 1 << config_.down_layers, "analysis transform");
  const int f = 1 << config_.down_layers;
  return Shape{input.n, config_.latent_channels, input.h / f, input.w / f};
}

SynthesisTransform::SynthesisTransform(const AutoencoderConfig& config, Rng& rng) {
  config.validate();
  for (int i = 0; i < config.down_layers; ++i) {
    const int in = i == 0 ? config.latent_channels : config.hidden_channels;
    const int out = i + 1 == config.down_layers ? config.input_channels : config.hidden_channels;
    convs_.push_back(std::make_unique<ConvTranspose2d>(in, out, kTransformKernel, 2, rng));
    register_module("deconv" + std::to_string(i), *convs_.back());
    if (i + 1 < config.down_layers) {
      gdns_.push_back(std::make_unique<Gdn>(out, true));
      register_module("igdn" + std::to_string(i), *gdns_.back());
    }
  }
}

Var SynthesisTransform::operator()(const Var& latent) const {
  Var h = latent;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    h = (*convs_[i])(h);
    if (i < gdns_.size()) h = (*gdns_[i])(h);
  }
  return h;
}

HyperAnalysis::HyperAnalysis(const AutoencoderConfig& config, Rng& rng)
    : down_layers_(config.hyper_down_layers) {
  convs_.push_back(std::make_unique<Conv2d>(config.latent_channels, config.hidden_channels,
                                            kInnerKernel, 1, rng));
  for (int i = 0; i < config.hyper_down_layers; ++i) {
    const int out = i + 1 == config.hyper_down_layers ? config.hyper_channels
                                                      : config.hidden_channels;
    convs_.push_back(std::make_unique<Conv2d>(config.hidden_channels, out, kInnerKernel, 2, rng));
  }
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    register_module("conv" + std::to_string(i), *convs_[i]);
  }
}

Var HyperAnalysis::operator()(const Var& latent) const {
  require_divisible(latent.shape(), 1 << down_layers_, "hyper analysis");
  Var h = latent;
  for (std::size_t i = 0; i < convs_.size(); ++i) {
    h = (*convs_[i])(h);
    if (i + 1 < convs_.size()) h = ops::relu(h);
  }
  return h;
}

HyperSynthesis::HyperSynthesis(const AutoencoderConfig& config, float scale_floor, Rng& rng)
    : config_(config), scale_floor_(scale_floor) {
  for (int i = 0; i < config.hyper_down_layers; ++i) {
    const int in = i == 0 ? config.hyper_channels : config.hidden_channels;
    ups_.push_back(
        std::make_unique<ConvTranspose2d>(in, config.hidden_channels, kInnerKernel, 2, rng));
    register_module("deconv" + std::to_string(i), *ups_.back());
  }
  const int out = config.predict_mean ? 2 * config.latent_channels : config.latent_channels;
  head_ = std::make_unique<Conv2d>(config.hidden_channels, out, kInnerKernel, 1, rng);
  register_module("head", *head_);
}

LaplaceField HyperSynthesis::operator()(const Var& hyper_latent) const {
  Var h = hyper_latent;
  for (const auto& up : ups_) h = ops::relu((*up)(h));
  h = (*head_)(h);
  const int latent = config_.latent_channels;
  LaplaceField field;
  if (config_.predict_mean) {
    field.mu = ops::slice_channels(h, 0, latent);
    field.scale = ops::softplus(ops::slice_channels(h, latent, latent), scale_floor_);
  } else {
    field.mu = Var(Tensor(h.shape(), 0.0f));
    field.scale = ops::softplus(h, scale_floor_);
  }
  return field;
}

CompressionNet::CompressionNet(const AutoencoderConfig& config, Rng& rng)
    : config_(config),
      analysis_(std::make_unique<AnalysisTransform>(config, rng)),
      synthesis_(std::make_unique<SynthesisTransform>(config, rng)),
      hyper_analysis_(std::make_unique<HyperAnalysis>(config, rng)),
      hyper_synthesis_(std::make_unique<HyperSynthesis>(config, 0.01f, rng)) {
  register_module("analysis", *analysis_);
  register_module("synthesis", *synthesis_);
  register_module("hyper_analysis", *hyper_analysis_);
  register_module("hyper_synthesis", *hyper_synthesis_);
}

void CompressionNet::check_input(const Shape& s) const {
  if (s.c != config_.input_channels) {
    throw ShapeError("compression net expects " + std::to_string(config_.input_channels) +
                     " channels, got " + s.str());
  }
  require_divisible(s, 1 << config_.down_layers, "compression net");
}

FlowPyramid::FlowPyramid(int levels, std::vector<int> hidden_channels, Rng& rng)
    : levels_(levels) {
  if (levels < 1) throw ConfigError("flow pyramid needs at least one level");
  if (hidden_channels.empty()) throw ConfigError("flow pyramid needs hidden layers");
  nets_.resize(levels);
  for (int l = 0; l < levels; ++l) {
    int in = 8;  // warped reference (3) + current (3) + upsampled flow (2)
    for (int c : hidden_channels) {
      nets_[l].convs.push_back(std::make_unique<Conv2d>(in, c, kInnerKernel, 1, rng));
      in = c;
    }
    nets_[l].convs.push_back(std::make_unique<Conv2d>(in, 2, kInnerKernel, 1, rng));
    for (std::size_t i = 0; i < nets_[l].convs.size(); ++i) {
      register_module("level" + std::to_string(l) + ".conv" + std::to_string(i),
                      *nets_[l].convs[i]);
    }
  }
}

Shape FlowPyramid::coarsest_extent(const Shape& input) const {
  const int f = 1 << (levels_ - 1);
  require_divisible(input, f, "flow pyramid");
  return Shape{input.n, 2, input.h / f, input.w / f};
}

Var FlowPyramid::operator()(const Var& reference, const Var& current) const {
  require_same_shape(reference.shape(), current.shape(), "flow pyramid");
  coarsest_extent(reference.shape());
  std::vector<Var> refs{reference}, curs{current};
  for (int l = 1; l < levels_; ++l) {
    refs.push_back(ops::avg_pool2(refs.back()));
    curs.push_back(ops::avg_pool2(curs.back()));
  }
  Var flow;
  for (int l = 0; l < levels_; ++l) {
    const std::size_t idx = levels_ - 1 - l;  // pyramid index, coarse first
    const Shape& s = curs[idx].shape();
    Var warped = refs[idx];
    if (!flow.defined()) {
      flow = Var(Tensor(Shape{s.n, 2, s.h, s.w}, 0.0f));
    } else {
      flow = ops::scale(ops::upsample2x(flow), 2.0f);
      warped = ops::warp(refs[idx], flow);
    }
    const std::array<Var, 3> parts{warped, curs[idx], flow};
    Var h = ops::concat_channels(parts);
    const auto& convs = nets_[l].convs;
    for (std::size_t i = 0; i < convs.size(); ++i) {
      h = (*convs[i])(h);
      if (i + 1 < convs.size()) h = ops::relu(h);
    }
    flow = ops::add(flow, h);
  }
  return flow;
}

void FlowPyramid::zero_output_layers() {
  for (auto& level : nets_) level.convs.back()->zero();
}

void FlowPyramid::scale_output_layers(float s) {
  for (auto& level : nets_) level.convs.back()->scale_weights(s);
}

MaskUNet::MaskUNet(int channels, Rng& rng) {
  const int c = channels;
  enc1_ = std::make_unique<Conv2d>(6, c, kInnerKernel, 1, rng);
  enc2_ = std::make_unique<Conv2d>(c, 2 * c, kInnerKernel, 2, rng);
  enc3_ = std::make_unique<Conv2d>(2 * c, 2 * c, kInnerKernel, 2, rng);
  up2_ = std::make_unique<ConvTranspose2d>(2 * c, 2 * c, kInnerKernel, 2, rng);
  merge2_ = std::make_unique<Conv2d>(4 * c, 2 * c, kInnerKernel, 1, rng);
  up1_ = std::make_unique<ConvTranspose2d>(2 * c, c, kInnerKernel, 2, rng);
  out_ = std::make_unique<Conv2d>(2 * c, 1, kInnerKernel, 1, rng);
  register_module("enc1", *enc1_);
  register_module("enc2", *enc2_);
  register_module("enc3", *enc3_);
  register_module("up2", *up2_);
  register_module("merge2", *merge2_);
  register_module("up1", *up1_);
  register_module("out", *out_);
}

Var MaskUNet::operator()(const Var& warped_past, const Var& warped_future) const {
  require_same_shape(warped_past.shape(), warped_future.shape(), "mask net");
  require_divisible(warped_past.shape(), 4, "mask net");
  const std::array<Var, 2> input{warped_past, warped_future};
  Var e1 = ops::relu((*enc1_)(ops::concat_channels(input)));
  Var e2 = ops::relu((*enc2_)(e1));
  Var e3 = ops::relu((*enc3_)(e2));
  Var d2 = ops::relu((*up2_)(e3));
  const std::array<Var, 2> skip2{d2, e2};
  d2 = ops::relu((*merge2_)(ops::concat_channels(skip2)));
  Var d1 = ops::relu((*up1_)(d2));
  const std::array<Var, 2> skip1{d1, e1};
  return ops::sigmoid((*out_)(ops::concat_channels(skip1)));
}

void MaskUNet::zero_output_layer() { out_->zero(); }

PostProcessor::PostProcessor(int channels, int blocks, Rng& rng) {
  if (channels < 1 || blocks < 0) throw ConfigError("post-processor config invalid");
  head_ = std::make_unique<Conv2d>(3, channels, kInnerKernel, 1, rng);
  register_module("head", *head_);
  blocks_.resize(blocks);
  for (int i = 0; i < blocks; ++i) {
    blocks_[i].first = std::make_unique<Conv2d>(channels, channels, kInnerKernel, 1, rng);
    blocks_[i].second = std::make_unique<Conv2d>(channels, channels, kInnerKernel, 1, rng);
    blocks_[i].second->scale_weights(0.1f);
    register_module("block" + std::to_string(i) + ".conv0", *blocks_[i].first);
    register_module("block" + std::to_string(i) + ".conv1", *blocks_[i].second);
  }
  tail_ = std::make_unique<Conv2d>(channels, 3, kInnerKernel, 1, rng);
  tail_->scale_weights(0.1f);
  register_module("tail", *tail_);
}

Var PostProcessor::operator()(const Var& image) const {
  if (image.shape().c != 3) throw ShapeError("post-processor expects 3 channels");
  Var h = (*head_)(image);
  for (const auto& b : blocks_) {
    h = ops::add(h, (*b.second)(ops::relu((*b.first)(h))));
  }
  return ops::add(image, (*tail_)(h));
}

void PostProcessor::zero_residual_paths() {
  for (auto& b : blocks_) b.second->zero();
  tail_->zero();
}

}  // namespace bgop::nn
