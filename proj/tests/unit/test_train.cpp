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

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <map>

#include "bgop/error.hpp"
#include "bgop/ops.hpp"
#include "bgop/motion.hpp"
#include "bgop/train.hpp"
#include "fixtures.hpp"

namespace bgop::train {
namespace {

using testing::tiny_config;

std::map<std::string, std::vector<float>> snapshot(const nn::Module& m) {
  std::map<std::string, std::vector<float>> out;
  for (const auto& p : m.parameters()) out[p.name] = p.var.value().to_vector();
  return out;
}

data::FrameDataset small_dataset(std::uint64_t seed, bool still = false, int frames = 5) {
  data::SyntheticSpec spec;
  spec.seed = seed;
  spec.sequences = 2;
  spec.frames = frames;
  spec.width = 64;
  spec.height = 64;
  spec.still = still;
  return data::make_synthetic_dataset(spec);
}

TrainConfig quick(Stage stage, int steps) {
  TrainConfig c = TrainConfig::desk(stage);
  c.steps = steps;
  c.batch_size = 1;
  c.smoothing_window = 1;
  return c;
}

TEST(Config, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  auto bad = [&](auto edit) {
    TrainConfig x;
    edit(x);
    EXPECT_THROW(x.validate(), ConfigError);
  };
  bad([](TrainConfig& x) { x.steps = 0; });
  bad([](TrainConfig& x) { x.learning_rate = 0; });
  bad([](TrainConfig& x) { x.batch_size = 0; });
  bad([](TrainConfig& x) { x.crop = 96; });
  bad([](TrainConfig& x) { x.lambda = -1; });
  bad([](TrainConfig& x) { x.gop_size = 6; });
  bad([](TrainConfig& x) { x.smoothing_window = 0; });
}

TEST(Config, Presets) {
  const auto p = TrainConfig::full(Stage::end_to_end);
  EXPECT_EQ(p.learning_rate, 1e-5);
  EXPECT_EQ(p.crop, 256);
  EXPECT_EQ(TrainConfig::full(Stage::image_pretrain).learning_rate, 3e-5);
  EXPECT_EQ(TrainConfig::desk(Stage::image_pretrain).batch_size, 4);
  for (auto s : {Stage::image_pretrain, Stage::flow_compression_pretrain, Stage::postproc_pretrain,
                 Stage::end_to_end}) {
    EXPECT_NO_THROW(TrainConfig::desk(s).validate());
    EXPECT_NO_THROW(TrainConfig::full(s).validate());
    EXPECT_EQ(parse_stage(to_string(s)), s);
  }
  EXPECT_THROW(parse_stage("warmup"), ConfigError);
}

TEST(Config, JsonRoundTrip) {
  TrainConfig c = TrainConfig::desk(Stage::flow_compression_pretrain);
  c.lambda = 1024;
  c.seed = 99;
  c.freeze_flow = true;
  c.augmentation.temporal_flip = false;
  nlohmann::json j = c;
  const auto back = j.get<TrainConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  const auto partial = nlohmann::json{{"steps", 7}}.get<TrainConfig>();
  EXPECT_EQ(partial.steps, 7);
  EXPECT_EQ(partial.learning_rate, TrainConfig{}.learning_rate);
  EXPECT_THROW((nlohmann::json{{"steps", 0}}.get<TrainConfig>()), ConfigError);
}

TEST(Adam, MinimizesQuadratic) {
  ag::Var x(Tensor(Shape{1, 1, 1, 3}, 0.0f), true);
  const std::vector<float> target{1.0f, -2.0f, 0.5f};
  Adam opt({x}, 0.05);
  for (int i = 0; i < 800; ++i) {
    ag::Var t(Tensor(Shape{1, 1, 1, 3}, target));
    ag::Var d = ops::sub(x, t);
    ag::backward(ops::sum(ops::mul(d, d)));
    opt.step();
  }
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(x.value()[i], target[i], 1e-2);
  EXPECT_EQ(opt.steps(), 800);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
  ag::Var x(Tensor(Shape{1, 1, 1, 2}, std::vector<float>{0.0f, 0.0f}), true);
  Adam opt({x}, 0.1);
  ag::Var w(Tensor(Shape{1, 1, 1, 2}, std::vector<float>{3.0f, -0.001f}));
  ag::backward(ops::sum(ops::mul(x, w)));
  opt.step();
  // bias correction makes the first update -lr * sign(g)
  EXPECT_NEAR(x.value()[0], -0.1f, 1e-5);
  EXPECT_NEAR(x.value()[1], 0.1f, 1e-4);
  EXPECT_THROW(Adam({}, 0.1), ConfigError);
}

TEST(Augmentation, Rotate90) {
  Tensor t(Shape{1, 1, 2, 3}, std::vector<float>{1, 2, 3, 4, 5, 6});
  // counterclockwise: the last column becomes the first row
  EXPECT_EQ(rotate90(t, 1).shape(), (Shape{1, 1, 3, 2}));
  EXPECT_EQ(rotate90(t, 1).to_vector(), (std::vector<float>{3, 6, 2, 5, 1, 4}));
  EXPECT_EQ(rotate90(t, 2).to_vector(), (std::vector<float>{6, 5, 4, 3, 2, 1}));
  EXPECT_EQ(rotate90(rotate90(t, 1), 3).to_vector(), t.to_vector());
  EXPECT_EQ(rotate90(t, 4).to_vector(), t.to_vector());
  EXPECT_EQ(rotate90(t, -1).to_vector(), rotate90(t, 3).to_vector());
}

// Frames hold their own index so sample order is visible.
data::FrameDataset indexed_dataset(int frames) {
  data::FrameDataset ds;
  data::Sequence seq;
  seq.name = "idx";
  seq.width = seq.height = 64;
  for (int f = 0; f < frames; ++f) seq.frames.emplace_back(Shape{1, 3, 64, 64}, f / 100.0f);
  ds.sequences.push_back(seq);
  return ds;
}

TEST(Sampler, TemporalFlipSwapsPastAndFuture) {
  const auto ds = indexed_dataset(9);
  AugmentationSpec aug;
  Sampler sampler(ds, aug, 64, 4);
  int forward = 0, backward = 0;
  for (int i = 0; i < 200; ++i) {
    const auto clip = sampler.clip(1, 3, 2);
    ASSERT_EQ(clip.size(), 3u);
    const float a = clip[0][0], b = clip[1][0], c = clip[2][0];
    const float step = std::round((b - a) * 100.0f);
    ASSERT_EQ(std::round((c - b) * 100.0f), step);
    ASSERT_TRUE(step == 2.0f || step == -2.0f);
    (step > 0 ? forward : backward)++;
  }
  EXPECT_GT(forward, 60);
  EXPECT_GT(backward, 60);

  aug.temporal_flip = false;
  Sampler ordered(ds, aug, 64, 4);
  for (int i = 0; i < 50; ++i) {
    const auto clip = ordered.clip(2, 5);
    for (int f = 1; f < 5; ++f) EXPECT_GT(clip[f][0], clip[f - 1][0]);
  }
  EXPECT_THROW(ordered.clip(1, 10), DataError);
}

TEST(Sampler, CropsAndBatches) {
  data::SyntheticSpec spec;
  spec.sequences = 1;
  spec.frames = 2;
  spec.width = 192;
  const auto ds = data::make_synthetic_dataset(spec);
  Sampler s(ds, AugmentationSpec{}, 64, 1);
  EXPECT_EQ(s.frames(3).shape(), (Shape{3, 3, 64, 64}));
  const auto clip = s.clip(2, 2);
  EXPECT_EQ(clip[1].shape(), (Shape{2, 3, 64, 64}));
  Sampler too_big(ds, AugmentationSpec{}, 256, 1);
  EXPECT_THROW(too_big.frames(1), DataError);
}

TEST(Training, EmptyDatasetIsAnError) {
  CodecModel model(tiny_config(), 1);
  data::FrameDataset empty;
  EXPECT_THROW(pretrain_image(model, empty, quick(Stage::image_pretrain, 1)), DataError);
  EXPECT_THROW(train_end_to_end(model, empty, quick(Stage::end_to_end, 1)), DataError);
  const auto ds = small_dataset(1);
  EXPECT_THROW(pretrain_image(model, ds, quick(Stage::end_to_end, 1)), ConfigError);
  EXPECT_THROW(train_end_to_end(model, ds, quick(Stage::end_to_end, 0)), ConfigError);
}

struct StageCase {
  Stage stage;
  bool freeze_flow;
  std::vector<std::string> changed;
};

class StageIsolation : public ::testing::TestWithParam<StageCase> {};

TEST_P(StageIsolation, OnlyStageGroupsChange) {
  const auto p = GetParam();
  CodecModel model(tiny_config(), 3);
  std::map<std::string, std::map<std::string, std::vector<float>>> before;
  for (const auto& g : CodecModel::group_names()) before[g] = snapshot(model.group(g));
  auto cfg = quick(p.stage, 2);
  cfg.freeze_flow = p.freeze_flow;
  EXPECT_EQ(stage_groups(cfg), p.changed);
  run_stage(model, small_dataset(2), cfg);
  for (const auto& g : CodecModel::group_names()) {
    const bool expect_change =
        std::find(p.changed.begin(), p.changed.end(), g) != p.changed.end();
    if (expect_change) {
      EXPECT_NE(snapshot(model.group(g)), before[g]) << g;
    } else {
      EXPECT_EQ(snapshot(model.group(g)), before[g]) << g;
    }
  }
  // every parameter is trainable again afterwards
  for (const auto& g : CodecModel::group_names()) {
    for (const auto& prm : model.group(g).parameters()) EXPECT_TRUE(prm.var.requires_grad()) << prm.name;
  }
}

INSTANTIATE_TEST_SUITE_P(
    Stages, StageIsolation,
    ::testing::Values(StageCase{Stage::image_pretrain, false, {"image_codec", "postproc"}},
                      StageCase{Stage::flow_compression_pretrain, false, {"flow_codec", "flow_net"}},
                      StageCase{Stage::flow_compression_pretrain, true, {"flow_codec"}},
                      StageCase{Stage::postproc_pretrain, false, {"postproc"}}));

TEST(Training, FreezeFlowKeepsEstimatorBitwise) {
  CodecModel model(tiny_config(), 5);
  const auto before = snapshot(model.group("flow_net"));
  auto cfg = quick(Stage::end_to_end, 2);
  cfg.freeze_flow = true;
  const auto r = train_end_to_end(model, small_dataset(3), cfg);
  EXPECT_EQ(snapshot(model.group("flow_net")), before);
  EXPECT_TRUE(r.audit.passed());
}

TEST(Training, EndToEndReachesEveryGroup) {
  CodecModel model(tiny_config(), 6);
  const auto before = snapshot(model);
  const auto r = train_end_to_end(model, small_dataset(4), quick(Stage::end_to_end, 1));
  EXPECT_TRUE(r.audit.passed());
  ASSERT_EQ(r.audit.groups.size(), CodecModel::group_names().size());
  for (const auto& [name, alive] : r.audit.groups) EXPECT_TRUE(alive) << name;
  EXPECT_FALSE(r.audit.tensors.empty());
  EXPECT_NE(snapshot(model), before);
  const auto& rec = r.log.at(0);
  EXPECT_NEAR(rec.L, rec.lambda * rec.D + rec.R_image + rec.R_flow + rec.R_residual,
              1e-6 * rec.L);
  EXPECT_GT(rec.R_flow, 0.0);
  EXPECT_GT(rec.R_residual, 0.0);
}

TEST(Training, ReproducibleForFixedSeed) {
  auto run = [] {
    CodecModel model(tiny_config(), 7);
    auto cfg = quick(Stage::end_to_end, 3);
    cfg.seed = 17;
    return train_end_to_end(model, small_dataset(5), cfg);
  };
  const auto a = run(), b = run();
  ASSERT_EQ(a.log.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(to_json(a.log[i]), to_json(b.log[i]));
}

TEST(Training, AuditFlagsGroupsWithoutGradient) {
  CodecModel model(tiny_config(), 8);
  const auto audit = audit_gradients(model);
  EXPECT_FALSE(audit.passed());
  EXPECT_EQ(audit.dead_groups().size(), CodecModel::group_names().size());
}

TEST(Training, SmoothedLoss) {
  std::vector<StepRecord> log;
  for (int i = 1; i <= 10; ++i) log.push_back({.step = i, .L = static_cast<double>(i)});
  EXPECT_DOUBLE_EQ(smoothed_loss(log, 3, false), 2.0);
  EXPECT_DOUBLE_EQ(smoothed_loss(log, 3, true), 9.0);
  EXPECT_DOUBLE_EQ(smoothed_loss(log, 50, true), 5.5);
  EXPECT_THROW(smoothed_loss({}, 3, true), ContractError);
}

TEST(Training, JsonlLogHasOneObjectPerStep) {
  testing::TempDir dir("jsonl");
  const auto path = dir.path() / "log.jsonl";
  {
    CodecModel model(tiny_config(), 9);
    JsonlLog log(path);
    pretrain_image(model, small_dataset(6), quick(Stage::image_pretrain, 3),
                   [&](const StepRecord& r) { log(r); });
  }
  std::ifstream in(path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    ++n;
    EXPECT_EQ(j["step"], n);
    EXPECT_EQ(j["stage"], "image_pretrain");
    for (const char* k : {"lambda", "L", "D", "R_image", "R_flow", "R_residual"}) {
      EXPECT_TRUE(j[k].is_number()) << k;
    }
    EXPECT_EQ(j["R_flow"], 0.0);
  }
  EXPECT_EQ(n, 3);
}

TEST(Sweep, Preconditions) {
  const auto ds = small_dataset(7);
  const auto cfg = quick(Stage::end_to_end, 1);
  EXPECT_THROW(lambda_sweep({256}, cfg, ds, ds, tiny_config()), ConfigError);
  EXPECT_THROW(lambda_sweep({256, 256}, cfg, ds, ds, tiny_config()), ConfigError);
  EXPECT_THROW(lambda_sweep({512, 256}, cfg, ds, ds, tiny_config()), ConfigError);
}

TEST(Sweep, OnePointPerLambda) {
  const auto ds = small_dataset(8);
  const auto cfg = quick(Stage::end_to_end, 2);
  CodecModel base(tiny_config(), 10);
  const auto before = snapshot(base);
  const auto pts = lambda_sweep({64, 1024}, cfg, ds, ds, tiny_config(), &base);
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0].point.lambda, 64);
  EXPECT_EQ(pts[1].point.lambda, 1024);
  for (const auto& p : pts) {
    EXPECT_EQ(p.point.bpp, p.eval.bpp);
    EXPECT_EQ(p.point.psnr, p.eval.psnr);
    EXPECT_EQ(p.training.log.size(), 2u);
    EXPECT_FALSE(p.eval.measured);
  }
  EXPECT_EQ(snapshot(base), before);
}

// Short runs on the tiny layout: the image stage makes clear progress and the
// flow stage learns to predict no motion on static content.
TEST(Pretraining, ImageLossDrops) {
  CodecModel model(tiny_config(), 11);
  auto cfg = TrainConfig::desk(Stage::image_pretrain);
  cfg.steps = 300;
  cfg.smoothing_window = 30;
  cfg.learning_rate = 1e-3;
  const auto r = pretrain_image(model, small_dataset(9), cfg);
  EXPECT_LT(r.final_smoothed, 0.5 * r.initial_smoothed)
      << r.initial_smoothed << " -> " << r.final_smoothed;
}

TEST(Pretraining, StaticContentGivesNearZeroFlow) {
  CodecModel model(tiny_config(), 12);
  const auto ds = small_dataset(10, true);
  auto cfg = TrainConfig::desk(Stage::flow_compression_pretrain);
  cfg.steps = 100;
  cfg.batch_size = 1;
  cfg.learning_rate = 1e-3;
  pretrain_flow_compression(model, ds, cfg);
  ag::NoGradGuard ng;
  const ag::Var f(ds.sequences[0].frames[0]);
  const auto flow = motion::estimate_bidirectional_flow(f, f, f, model.flow_net());
  double sum = 0;
  for (float v : flow.packed().value().to_vector()) sum += std::abs(v);
  EXPECT_LT(sum / flow.packed().value().numel(), 0.1);
}

}  // namespace
}  // namespace bgop::train
