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

#include "bgop/model.hpp"

#include <algorithm>

#include "bgop/error.hpp"

namespace bgop {

ModelConfig ModelConfig::desk() { return ModelConfig{}; }

ModelConfig ModelConfig::full() {
  ModelConfig c;
  c.model_id = 2;
  c.hidden_channels = 96;
  c.latent_channels = 192;
  c.hyper_channels = 96;
  c.flow_channels = {32, 64, 32, 16};
  c.flow_levels = 5;
  c.mask_channels = 32;
  c.postproc_channels = 64;
  return c;
}

nn::AutoencoderConfig ModelConfig::autoencoder(int input_channels) const {
  nn::AutoencoderConfig a;
  a.input_channels = input_channels;
  a.hidden_channels = hidden_channels;
  a.latent_channels = latent_channels;
  a.hyper_channels = hyper_channels;
  a.down_layers = down_layers;
  a.hyper_down_layers = hyper_down_layers;
  a.predict_mean = predict_mean;
  return a;
}

int ModelConfig::alignment() const {
  int a = 1 << (down_layers + hyper_down_layers);
  a = std::max(a, 1 << (flow_levels - 1));
  return std::max(a, 4);  // mask network halves twice
}

void ModelConfig::validate() const {
  autoencoder(3).validate();
  if (model_id < 0 || model_id > 255) throw ConfigError("model_id must fit in one byte");
  if (flow_levels < 1 || flow_channels.empty()) throw ConfigError("invalid flow network config");
  if (mask_channels < 1 || postproc_channels < 1 || postproc_blocks < 0) {
    throw ConfigError("invalid mask/post-processing config");
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"model_id", c.model_id},
                     {"hidden_channels", c.hidden_channels},
                     {"latent_channels", c.latent_channels},
                     {"hyper_channels", c.hyper_channels},
                     {"down_layers", c.down_layers},
                     {"hyper_down_layers", c.hyper_down_layers},
                     {"predict_mean", c.predict_mean},
                     {"flow_levels", c.flow_levels},
                     {"flow_channels", c.flow_channels},
                     {"mask_channels", c.mask_channels},
                     {"postproc_channels", c.postproc_channels},
                     {"postproc_blocks", c.postproc_blocks}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  ModelConfig d;
  c.model_id = j.value("model_id", d.model_id);
  c.hidden_channels = j.value("hidden_channels", d.hidden_channels);
  c.latent_channels = j.value("latent_channels", d.latent_channels);
  c.hyper_channels = j.value("hyper_channels", d.hyper_channels);
  c.down_layers = j.value("down_layers", d.down_layers);
  c.hyper_down_layers = j.value("hyper_down_layers", d.hyper_down_layers);
  c.predict_mean = j.value("predict_mean", d.predict_mean);
  c.flow_levels = j.value("flow_levels", d.flow_levels);
  c.flow_channels = j.value("flow_channels", d.flow_channels);
  c.mask_channels = j.value("mask_channels", d.mask_channels);
  c.postproc_channels = j.value("postproc_channels", d.postproc_channels);
  c.postproc_blocks = j.value("postproc_blocks", d.postproc_blocks);
}

CodecModel::CodecModel(const ModelConfig& config, std::uint64_t seed) : config_(config) {
  config.validate();
  nn::Rng rng(seed);
  image_codec_ = std::make_unique<nn::CompressionNet>(config.autoencoder(3), rng);
  flow_codec_ = std::make_unique<nn::CompressionNet>(config.autoencoder(4), rng);
  residual_codec_ = std::make_unique<nn::CompressionNet>(config.autoencoder(3), rng);
  flow_net_ = std::make_unique<nn::FlowPyramid>(config.flow_levels, config.flow_channels, rng);
  flow_net_->scale_output_layers(0.1f);
  mask_net_ = std::make_unique<nn::MaskUNet>(config.mask_channels, rng);
  postproc_ = std::make_unique<nn::PostProcessor>(config.postproc_channels,
                                                  config.postproc_blocks, rng);
  register_module("image_codec", *image_codec_);
  register_module("flow_codec", *flow_codec_);
  register_module("residual_codec", *residual_codec_);
  register_module("flow_net", *flow_net_);
  register_module("mask_net", *mask_net_);
  register_module("postproc", *postproc_);
}

const std::vector<std::string>& CodecModel::group_names() {
  static const std::vector<std::string> names{"image_codec", "flow_codec", "residual_codec",
                                              "flow_net",    "mask_net",   "postproc"};
  return names;
}

nn::Module& CodecModel::group(const std::string& name) {
  if (name == "image_codec") return *image_codec_;
  if (name == "flow_codec") return *flow_codec_;
  if (name == "residual_codec") return *residual_codec_;
  if (name == "flow_net") return *flow_net_;
  if (name == "mask_net") return *mask_net_;
  if (name == "postproc") return *postproc_;
  throw ConfigError("unknown module group: " + name);
}

std::unique_ptr<CodecModel> CodecModel::clone() const {
  auto copy = std::make_unique<CodecModel>(config_);
  copy->copy_weights_from(*this);
  return copy;
}

}  // namespace bgop
