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
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgop/nn/networks.hpp"

namespace bgop {

/// Architecture of the whole codec. Serialized into checkpoints.
struct ModelConfig {
  int model_id = 1;
  int hidden_channels = 48;
  int latent_channels = 96;
  int hyper_channels = 48;
  int down_layers = 4;
  int hyper_down_layers = 2;
  bool predict_mean = true;
  int flow_levels = 3;
  std::vector<int> flow_channels{16, 16};
  int mask_channels = 12;
  int postproc_channels = 8;
  int postproc_blocks = 12;

  /// CPU-sized defaults used throughout the tests.
  static ModelConfig desk();
  /// Channel widths of the full-size model (96/192 transforms, 64-channel post-processing).
  static ModelConfig full();

  nn::AutoencoderConfig autoencoder(int input_channels) const;
  /// Frame dims must be multiples of this (64 for the default layouts).
  int alignment() const;
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

/// Every trainable network of the codec, grouped the way training stages use them.
class CodecModel : public nn::Module {
 public:
  explicit CodecModel(const ModelConfig& config, std::uint64_t seed = 1);

  const ModelConfig& config() const { return config_; }

  nn::CompressionNet& image_codec() { return *image_codec_; }
  nn::CompressionNet& flow_codec() { return *flow_codec_; }
  nn::CompressionNet& residual_codec() { return *residual_codec_; }
  nn::FlowPyramid& flow_net() { return *flow_net_; }
  nn::MaskUNet& mask_net() { return *mask_net_; }
  nn::PostProcessor& postproc() { return *postproc_; }
  const nn::CompressionNet& image_codec() const { return *image_codec_; }
  const nn::CompressionNet& flow_codec() const { return *flow_codec_; }
  const nn::CompressionNet& residual_codec() const { return *residual_codec_; }
  const nn::FlowPyramid& flow_net() const { return *flow_net_; }
  const nn::MaskUNet& mask_net() const { return *mask_net_; }
  const nn::PostProcessor& postproc() const { return *postproc_; }

  /// Top-level module names, in parameter order.
  static const std::vector<std::string>& group_names();
  nn::Module& group(const std::string& name);

  /// Independent copy with identical weights.
  std::unique_ptr<CodecModel> clone() const;

 private:
  ModelConfig config_;
  std::unique_ptr<nn::CompressionNet> image_codec_, flow_codec_, residual_codec_;
  std::unique_ptr<nn::FlowPyramid> flow_net_;
  std::unique_ptr<nn::MaskUNet> mask_net_;
  std::unique_ptr<nn::PostProcessor> postproc_;
};

}  // namespace bgop
