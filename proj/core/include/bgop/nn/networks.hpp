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

#include <memory>
#include <vector>

#include "bgop/nn/module.hpp"

namespace bgop::nn {

/// Layout of one strided compression autoencoder and its hyperprior.
struct AutoencoderConfig {
  int input_channels = 3;
  int hidden_channels = 48;
  int latent_channels = 96;
  int hyper_channels = 48;  // channels of the hyper latent z
  int down_layers = 4;
  int hyper_down_layers = 2;
  bool predict_mean = true;  // false: scale-only hyperprior, mu = 0

  /// Spatial factor frames must be divisible by: 2^(down + hyper_down).
  int alignment() const { return 1 << (down_layers + hyper_down_layers); }
  void validate() const;
};

/// Strided 5x5 convolutions with GDN in between.
class AnalysisTransform : public Module {
 public:
  AnalysisTransform(const AutoencoderConfig& config, Rng& rng);
  Var operator()(const Var& x) const;
  Shape latent_shape(const Shape& input) const;

 private:
  AutoencoderConfig config_;
  std::vector<std::unique_ptr<Conv2d>> convs_;
  std::vector<std::unique_ptr<Gdn>> gdns_;
};

/// Mirror of AnalysisTransform with transposed convolutions and IGDN.
class SynthesisTransform : public Module {
 public:
  SynthesisTransform(const AutoencoderConfig& config, Rng& rng);
  Var operator()(const Var& latent) const;

 private:
  std::vector<std::unique_ptr<ConvTranspose2d>> convs_;
  std::vector<std::unique_ptr<Gdn>> gdns_;
};

class HyperAnalysis : public Module {
 public:
  HyperAnalysis(const AutoencoderConfig& config, Rng& rng);
  Var operator()(const Var& latent) const;

 private:
  int down_layers_;
  std::vector<std::unique_ptr<Conv2d>> convs_;
};

/// Per-element Laplace parameters for the main latent.
struct LaplaceField {
  Var mu;
  Var scale;
};

class HyperSynthesis : public Module {
 public:
  HyperSynthesis(const AutoencoderConfig& config, float scale_floor, Rng& rng);
  LaplaceField operator()(const Var& hyper_latent) const;

 private:
  AutoencoderConfig config_;
  float scale_floor_;
  std::vector<std::unique_ptr<ConvTranspose2d>> ups_;
  std::unique_ptr<Conv2d> head_;
};

/// One compression network: analysis/synthesis pair plus the hyperprior autoencoder.
/// Used for key frames (3 channels), flow pairs (4 channels) and residuals.
class CompressionNet : public Module {
 public:
  CompressionNet(const AutoencoderConfig& config, Rng& rng);

  const AutoencoderConfig& config() const { return config_; }
  AnalysisTransform& analysis() { return *analysis_; }
  SynthesisTransform& synthesis() { return *synthesis_; }
  HyperAnalysis& hyper_analysis() { return *hyper_analysis_; }
  HyperSynthesis& hyper_synthesis() { return *hyper_synthesis_; }
  const AnalysisTransform& analysis() const { return *analysis_; }
  const SynthesisTransform& synthesis() const { return *synthesis_; }
  const HyperAnalysis& hyper_analysis() const { return *hyper_analysis_; }
  const HyperSynthesis& hyper_synthesis() const { return *hyper_synthesis_; }

  /// Throws ShapeError unless H and W are divisible by 2^down_layers.
  void check_input(const Shape& s) const;

 private:
  AutoencoderConfig config_;
  std::unique_ptr<AnalysisTransform> analysis_;
  std::unique_ptr<SynthesisTransform> synthesis_;
  std::unique_ptr<HyperAnalysis> hyper_analysis_;
  std::unique_ptr<HyperSynthesis> hyper_synthesis_;
};

/// Coarse-to-fine residual flow estimator. Each level refines the upsampled
/// coarser flow from (reference warped by it, current frame, the flow itself).
/// The returned field lives on the current frame's grid and points into the
/// reference: warp(reference, flow) approximates current.
class FlowPyramid : public Module {
 public:
  FlowPyramid(int levels, std::vector<int> hidden_channels, Rng& rng);
  Var operator()(const Var& reference, const Var& current) const;

  int levels() const { return levels_; }
  /// Spatial extent processed at the coarsest level for a given input.
  Shape coarsest_extent(const Shape& input) const;
  void zero_output_layers();
  void scale_output_layers(float s);

 private:
  struct Level {
    std::vector<std::unique_ptr<Conv2d>> convs;
  };
  int levels_;
  std::vector<Level> nets_;  // index 0 = coarsest
};

/// U-shaped mask network over the two warped references (6 channels in),
/// sigmoid output in (0, 1).
class MaskUNet : public Module {
 public:
  MaskUNet(int channels, Rng& rng);
  Var operator()(const Var& warped_past, const Var& warped_future) const;
  void zero_output_layer();

 private:
  std::unique_ptr<Conv2d> enc1_, enc2_, enc3_, merge2_, out_;
  std::unique_ptr<ConvTranspose2d> up2_, up1_;
};

/// Residual-block enhancement network with a global skip from input to output.
class PostProcessor : public Module {
 public:
  PostProcessor(int channels, int blocks, Rng& rng);
  Var operator()(const Var& image) const;
  int block_count() const { return static_cast<int>(blocks_.size()); }
  /// Zero the last conv of every block and the output conv: output == input.
  void zero_residual_paths();

 private:
  struct Block {
    std::unique_ptr<Conv2d> first, second;
  };
  std::unique_ptr<Conv2d> head_, tail_;
  std::vector<Block> blocks_;
};

}  // namespace bgop::nn
