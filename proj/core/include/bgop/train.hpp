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
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "bgop/coder.hpp"
#include "bgop/dataset.hpp"
#include "bgop/evaluate.hpp"
#include "bgop/metrics.hpp"
#include "bgop/model.hpp"

namespace bgop::train {

enum class Stage { image_pretrain, flow_compression_pretrain, postproc_pretrain, end_to_end };

std::string to_string(Stage stage);
Stage parse_stage(const std::string& name);

struct AugmentationSpec {
  bool random_crop = true;
  bool random_rotation = true;  // multiples of 90 degrees
  bool temporal_flip = true;    // GOP and triplet samples only
};

struct TrainConfig {
  Stage stage = Stage::end_to_end;
  double learning_rate = 2e-4;
  int batch_size = 2;
  int steps = 2000;
  int crop = 64;
  double lambda = 256.0;
  std::uint64_t seed = 1;
  bool freeze_flow = false;
  int gop_size = 4;
  /// image_pretrain also trains the post-processing network.
  bool joint_postproc = true;
  AugmentationSpec augmentation;
  int smoothing_window = 50;

  /// CPU-sized settings that finish in minutes on the synthetic data.
  static TrainConfig desk(Stage stage);
  /// Full-size settings (256 crops, constant learning rates of 3e-5 / 1e-5).
  static TrainConfig full(Stage stage);
  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
/// Missing keys take the desk defaults of the given (or default) stage.
void from_json(const nlohmann::json& j, TrainConfig& c);

struct StepRecord {
  int step = 0;
  Stage stage = Stage::end_to_end;
  double lambda = 0.0;
  double L = 0.0;
  double D = 0.0;
  double R_image = 0.0;
  double R_flow = 0.0;
  double R_residual = 0.0;
};

nlohmann::json to_json(const StepRecord& r);

using LogSink = std::function<void(const StepRecord&)>;

/// Appends one JSON object per line.
class JsonlLog {
 public:
  explicit JsonlLog(const std::filesystem::path& path);
  void operator()(const StepRecord& record);

 private:
  std::ofstream out_;
};

/// Per parameter tensor and per module group: did any gradient element differ from zero?
struct GradientAudit {
  std::vector<std::pair<std::string, bool>> groups;
  std::vector<std::pair<std::string, bool>> tensors;
  std::vector<std::string> dead_groups() const;
  bool passed() const { return dead_groups().empty(); }
};

/// Inspects the gradients currently held by the model's trainable groups.
GradientAudit audit_gradients(const CodecModel& model);

struct TrainResult {
  std::vector<StepRecord> log;
  double initial_smoothed = 0.0;  // mean L over the first window of steps
  double final_smoothed = 0.0;    // mean L over the last window of steps
  GradientAudit audit;            // end_to_end: taken after the first backward pass
};

/// Mean of L over the first (or last) `window` records.
double smoothed_loss(const std::vector<StepRecord>& log, int window, bool at_end);

/// First-order optimizer with bias-corrected moment estimates.
class Adam {
 public:
  explicit Adam(std::vector<ag::Var> params, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double epsilon = 1e-8);
  /// Updates every parameter that holds a gradient, then clears all gradients.
  void step();
  long long steps() const { return t_; }

 private:
  std::vector<ag::Var> params_;
  std::vector<Tensor> m_, v_;
  double lr_, b1_, b2_, eps_;
  long long t_ = 0;
};

/// Draws augmented training samples from a dataset.
class Sampler {
 public:
  Sampler(const data::FrameDataset& dataset, const AugmentationSpec& augmentation, int crop,
          std::uint64_t seed);
  /// B independent frames, stacked to Bx3xCxC.
  Tensor frames(int batch);
  /// `length` consecutive frames at spacing `stride`, each stacked to Bx3xCxC.
  /// With temporal flip enabled, half of the samples are time-reversed.
  std::vector<Tensor> clip(int batch, int length, int stride = 1);
  std::mt19937_64& rng() { return rng_; }

 private:
  struct Window {
    std::size_t sequence;
    std::size_t start;
    int top, left, quarter_turns;
    bool reversed;
  };
  Window draw(int length, int stride);
  Tensor extract(const Tensor& frame, const Window& w) const;

  const data::FrameDataset& dataset_;
  AugmentationSpec augmentation_;
  int crop_;
  std::mt19937_64 rng_;
};

/// Rotates a 1xCxHxW tensor by quarter_turns * 90 degrees counterclockwise.
Tensor rotate90(const Tensor& frame, int quarter_turns);

TrainResult pretrain_image(CodecModel& model, const data::FrameDataset& dataset,
                           const TrainConfig& config, const LogSink& sink = {});
TrainResult pretrain_flow_compression(CodecModel& model, const data::FrameDataset& dataset,
                                      const TrainConfig& config, const LogSink& sink = {});
TrainResult pretrain_postproc(CodecModel& model, const data::FrameDataset& dataset,
                              const TrainConfig& config, const LogSink& sink = {});
/// Throws ContractError naming every module group left without a gradient
/// after the first backward pass.
TrainResult train_end_to_end(CodecModel& model, const data::FrameDataset& dataset,
                             const TrainConfig& config, const LogSink& sink = {});
/// Dispatches on config.stage.
TrainResult run_stage(CodecModel& model, const data::FrameDataset& dataset,
                      const TrainConfig& config, const LogSink& sink = {});

/// Module groups a stage may modify.
std::vector<std::string> stage_groups(const TrainConfig& config);

struct SweepPoint {
  metrics::RdPoint point;
  EvalResult eval;
  TrainResult training;
};

/// One end-to-end run per lambda (ascending, at least two), each starting from
/// `initial` (or a fresh model seeded by base.seed), then round-mode evaluation.
std::vector<SweepPoint> lambda_sweep(const std::vector<double>& lambdas, const TrainConfig& base,
                                     const data::FrameDataset& train_set,
                                     const data::FrameDataset& eval_set,
                                     const ModelConfig& model_config,
                                     const CodecModel* initial = nullptr,
                                     coder::SymbolCoder* coder = nullptr,
                                     const LogSink& sink = {});

}  // namespace bgop::train
