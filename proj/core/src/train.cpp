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

#include "bgop/train.hpp"

#include <algorithm>
#include <cmath>

#include "bgop/error.hpp"
#include "bgop/gop.hpp"
#include "bgop/motion.hpp"
#include "bgop/ops.hpp"

namespace bgop::train {
namespace {

using ag::Var;

struct StageSpec {
  Stage stage;
  const char* name;
};
constexpr StageSpec kStages[] = {{Stage::image_pretrain, "image_pretrain"},
                                 {Stage::flow_compression_pretrain, "flow_compression_pretrain"},
                                 {Stage::postproc_pretrain, "postproc_pretrain"},
                                 {Stage::end_to_end, "end_to_end"}};

// Freezes every group outside the stage for the lifetime of the guard.
class StageScope {
 public:
  StageScope(CodecModel& model, const std::vector<std::string>& groups) : model_(model) {
    for (const auto& name : CodecModel::group_names()) {
      const bool on = std::find(groups.begin(), groups.end(), name) != groups.end();
      model_.group(name).set_trainable(on);
    }
  }
  ~StageScope() {
    for (const auto& name : CodecModel::group_names()) model_.group(name).set_trainable(true);
  }
  StageScope(const StageScope&) = delete;
  StageScope& operator=(const StageScope&) = delete;

 private:
  CodecModel& model_;
};

std::vector<Var> trainable(const CodecModel& model) {
  std::vector<Var> out;
  for (const auto& p : model.parameters()) {
    if (p.var.requires_grad()) out.push_back(p.var);
  }
  return out;
}

bool has_nonzero(const Tensor& g) { return g.numel() > 0 && g.max_abs() > 0.0f; }

void require_stage(const TrainConfig& config, Stage stage) {
  config.validate();
  if (config.stage != stage) {
    throw ConfigError("config stage is " + to_string(config.stage) + ", expected " +
                      to_string(stage));
  }
}

void require_data(const data::FrameDataset& dataset, const TrainConfig& config, int length) {
  if (dataset.empty()) throw DataError("training dataset is empty");
  bool any = false;
  for (const auto& s : dataset.sequences) {
    if (static_cast<int>(s.frames.size()) >= length && s.width >= config.crop &&
        s.height >= config.crop) {
      any = true;
    }
  }
  if (!any) {
    throw DataError("no sequence has " + std::to_string(length) + " frames of at least " +
                    std::to_string(config.crop) + "x" + std::to_string(config.crop));
  }
}

double pixels(const Tensor& batch) {
  const Shape s = batch.shape();
  return static_cast<double>(s.n) * s.h * s.w;
}

template <class StepFn>
TrainResult run_loop(CodecModel& model, const TrainConfig& config, const LogSink& sink,
                     StepFn&& step_fn) {
  StageScope scope(model, stage_groups(config));
  Adam adam(trainable(model), config.learning_rate);
  TrainResult result;
  result.log.reserve(static_cast<std::size_t>(config.steps));
  for (int step = 1; step <= config.steps; ++step) {
    StepRecord rec = step_fn(step, result);
    rec.step = step;
    rec.stage = config.stage;
    rec.lambda = config.lambda;
    if (!std::isfinite(rec.L)) {
      throw ContractError("non-finite loss at step " + std::to_string(step) + " of " +
                          to_string(config.stage));
    }
    adam.step();
    if (sink) sink(rec);
    result.log.push_back(rec);
  }
  result.initial_smoothed = smoothed_loss(result.log, config.smoothing_window, false);
  result.final_smoothed = smoothed_loss(result.log, config.smoothing_window, true);
  return result;
}

}  // namespace

std::string to_string(Stage stage) {
  for (const auto& s : kStages) {
    if (s.stage == stage) return s.name;
  }
  throw ContractError("unknown stage");
}

Stage parse_stage(const std::string& name) {
  for (const auto& s : kStages) {
    if (name == s.name) return s.stage;
  }
  throw ConfigError("unknown training stage '" + name + "'");
}

TrainConfig TrainConfig::desk(Stage stage) {
  TrainConfig c;
  c.stage = stage;
  if (stage == Stage::image_pretrain || stage == Stage::postproc_pretrain) c.batch_size = 4;
  return c;
}

TrainConfig TrainConfig::full(Stage stage) {
  TrainConfig c;
  c.stage = stage;
  c.crop = 256;
  c.freeze_flow = true;
  if (stage == Stage::end_to_end) {
    c.learning_rate = 1e-5;
    c.batch_size = 4;
  } else {
    c.learning_rate = 3e-5;
    c.batch_size = 16;
  }
  c.steps = 400000;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (steps < 1) throw ConfigError("steps must be at least 1");
  if (crop < data::kAlignment || crop % data::kAlignment != 0) {
    throw ConfigError("crop must be a positive multiple of 64");
  }
  if (!(lambda >= 0.0)) throw ConfigError("lambda must be nonnegative");
  if (gop_size < 1 || (gop_size & (gop_size - 1)) != 0) {
    throw ConfigError("gop_size must be a power of 2");
  }
  if (smoothing_window < 1) throw ConfigError("smoothing_window must be at least 1");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = {{"stage", to_string(c.stage)},
       {"learning_rate", c.learning_rate},
       {"batch_size", c.batch_size},
       {"steps", c.steps},
       {"crop", c.crop},
       {"lambda", c.lambda},
       {"seed", c.seed},
       {"freeze_flow", c.freeze_flow},
       {"gop_size", c.gop_size},
       {"joint_postproc", c.joint_postproc},
       {"smoothing_window", c.smoothing_window},
       {"augmentation",
        {{"random_crop", c.augmentation.random_crop},
         {"random_rotation", c.augmentation.random_rotation},
         {"temporal_flip", c.augmentation.temporal_flip}}}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  try {
    const Stage stage = parse_stage(j.value("stage", to_string(c.stage)));
    const TrainConfig d = TrainConfig::desk(stage);
    c.stage = stage;
    c.learning_rate = j.value("learning_rate", d.learning_rate);
    c.batch_size = j.value("batch_size", d.batch_size);
    c.steps = j.value("steps", d.steps);
    c.crop = j.value("crop", d.crop);
    c.lambda = j.value("lambda", d.lambda);
    c.seed = j.value("seed", d.seed);
    c.freeze_flow = j.value("freeze_flow", d.freeze_flow);
    c.gop_size = j.value("gop_size", d.gop_size);
    c.joint_postproc = j.value("joint_postproc", d.joint_postproc);
    c.smoothing_window = j.value("smoothing_window", d.smoothing_window);
    c.augmentation = d.augmentation;
    if (j.contains("augmentation")) {
      const auto& a = j.at("augmentation");
      c.augmentation.random_crop = a.value("random_crop", d.augmentation.random_crop);
      c.augmentation.random_rotation = a.value("random_rotation", d.augmentation.random_rotation);
      c.augmentation.temporal_flip = a.value("temporal_flip", d.augmentation.temporal_flip);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid training config: ") + e.what());
  }
  c.validate();
}

nlohmann::json to_json(const StepRecord& r) {
  return {{"step", r.step},         {"stage", to_string(r.stage)}, {"lambda", r.lambda},
          {"L", r.L},               {"D", r.D},                    {"R_image", r.R_image},
          {"R_flow", r.R_flow},     {"R_residual", r.R_residual}};
}

JsonlLog::JsonlLog(const std::filesystem::path& path) : out_(path, std::ios::app) {
  if (!out_) throw DataError("cannot open training log " + path.string());
}

void JsonlLog::operator()(const StepRecord& record) {
  out_ << to_json(record).dump() << '\n';
  out_.flush();
}

std::vector<std::string> GradientAudit::dead_groups() const {
  std::vector<std::string> out;
  for (const auto& [name, ok] : groups) {
    if (!ok) out.push_back(name);
  }
  return out;
}

GradientAudit audit_gradients(const CodecModel& model) {
  GradientAudit audit;
  auto& m = const_cast<CodecModel&>(model);
  for (const auto& group : CodecModel::group_names()) {
    bool any_trainable = false, any_live = false;
    for (const auto& p : m.group(group).parameters()) {
      if (!p.var.requires_grad()) continue;
      any_trainable = true;
      const bool live = has_nonzero(p.var.grad());
      any_live = any_live || live;
      audit.tensors.emplace_back(group + "." + p.name, live);
    }
    if (any_trainable) audit.groups.emplace_back(group, any_live);
  }
  return audit;
}

double smoothed_loss(const std::vector<StepRecord>& log, int window, bool at_end) {
  if (log.empty()) throw ContractError("empty training log");
  const std::size_t n = std::min(log.size(), static_cast<std::size_t>(std::max(window, 1)));
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += (at_end ? log[log.size() - 1 - i] : log[i]).L;
  return total / static_cast<double>(n);
}

Adam::Adam(std::vector<Var> params, double learning_rate, double beta1, double beta2,
           double epsilon)
    : params_(std::move(params)), lr_(learning_rate), b1_(beta1), b2_(beta2), eps_(epsilon) {
  if (params_.empty()) throw ConfigError("optimizer has no trainable parameters");
  for (const auto& p : params_) {
    m_.emplace_back(p.shape());
    v_.emplace_back(p.shape());
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Var& p = params_[i];
    const Tensor& g = p.grad();
    if (g.numel() == 0) continue;
    Tensor& w = p.mutable_value();
    Tensor& m = m_[i];
    Tensor& v = v_[i];
    for (std::size_t k = 0; k < w.numel(); ++k) {
      const double gk = g[k];
      m[k] = static_cast<float>(b1_ * m[k] + (1.0 - b1_) * gk);
      v[k] = static_cast<float>(b2_ * v[k] + (1.0 - b2_) * gk * gk);
      const double mh = m[k] / c1;
      const double vh = v[k] / c2;
      w[k] = static_cast<float>(w[k] - lr_ * mh / (std::sqrt(vh) + eps_));
    }
    p.zero_grad();
  }
}

Sampler::Sampler(const data::FrameDataset& dataset, const AugmentationSpec& augmentation, int crop,
                 std::uint64_t seed)
    : dataset_(dataset), augmentation_(augmentation), crop_(crop), rng_(seed) {}

Sampler::Window Sampler::draw(int length, int stride) {
  const int span = (length - 1) * stride + 1;
  std::vector<std::size_t> usable;
  for (std::size_t s = 0; s < dataset_.sequences.size(); ++s) {
    const auto& seq = dataset_.sequences[s];
    if (static_cast<int>(seq.frames.size()) >= span && seq.width >= crop_ && seq.height >= crop_) {
      usable.push_back(s);
    }
  }
  if (usable.empty()) {
    throw DataError("no sequence can supply " + std::to_string(length) + " frames at stride " +
                    std::to_string(stride) + " with crop " + std::to_string(crop_));
  }
  Window w{};
  w.sequence = usable[std::uniform_int_distribution<std::size_t>(0, usable.size() - 1)(rng_)];
  const auto& seq = dataset_.sequences[w.sequence];
  w.start = std::uniform_int_distribution<std::size_t>(0, seq.frames.size() - span)(rng_);
  if (augmentation_.random_crop) {
    w.top = std::uniform_int_distribution<int>(0, seq.height - crop_)(rng_);
    w.left = std::uniform_int_distribution<int>(0, seq.width - crop_)(rng_);
  } else {
    w.top = (seq.height - crop_) / 2;
    w.left = (seq.width - crop_) / 2;
  }
  w.quarter_turns = augmentation_.random_rotation ? std::uniform_int_distribution<int>(0, 3)(rng_) : 0;
  w.reversed = augmentation_.temporal_flip && length > 1 &&
               std::uniform_int_distribution<int>(0, 1)(rng_) == 1;
  return w;
}

Tensor Sampler::extract(const Tensor& frame, const Window& w) const {
  Tensor out(Shape{1, 3, crop_, crop_});
  for (int c = 0; c < 3; ++c) {
    for (int y = 0; y < crop_; ++y) {
      for (int x = 0; x < crop_; ++x) out.at(0, c, y, x) = frame.at(0, c, y + w.top, x + w.left);
    }
  }
  return rotate90(out, w.quarter_turns);
}

Tensor Sampler::frames(int batch) {
  std::vector<Tensor> items;
  for (int b = 0; b < batch; ++b) {
    const Window w = draw(1, 1);
    items.push_back(extract(dataset_.sequences[w.sequence].frames[w.start], w));
  }
  return stack_batch(items);
}

std::vector<Tensor> Sampler::clip(int batch, int length, int stride) {
  std::vector<std::vector<Tensor>> per_time(static_cast<std::size_t>(length));
  for (int b = 0; b < batch; ++b) {
    const Window w = draw(length, stride);
    const auto& seq = dataset_.sequences[w.sequence];
    for (int t = 0; t < length; ++t) {
      const int src = w.reversed ? length - 1 - t : t;
      per_time[t].push_back(extract(seq.frames[w.start + static_cast<std::size_t>(src) * stride], w));
    }
  }
  std::vector<Tensor> out;
  for (const auto& items : per_time) out.push_back(stack_batch(items));
  return out;
}

Tensor rotate90(const Tensor& frame, int quarter_turns) {
  const int q = ((quarter_turns % 4) + 4) % 4;
  if (q == 0) return frame;
  const Shape s = frame.shape();
  const Shape o = (q % 2 == 0) ? s : Shape{s.n, s.c, s.w, s.h};
  Tensor out(o);
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < s.h; ++y) {
        for (int x = 0; x < s.w; ++x) {
          int oy = y, ox = x;
          if (q == 1) {
            oy = s.w - 1 - x;
            ox = y;
          } else if (q == 2) {
            oy = s.h - 1 - y;
            ox = s.w - 1 - x;
          } else {
            oy = x;
            ox = s.h - 1 - y;
          }
          out.at(n, c, oy, ox) = frame.at(n, c, y, x);
        }
      }
    }
  }
  return out;
}

std::vector<std::string> stage_groups(const TrainConfig& config) {
  switch (config.stage) {
    case Stage::image_pretrain:
      if (config.joint_postproc) return {"image_codec", "postproc"};
      return {"image_codec"};
    case Stage::flow_compression_pretrain:
      if (config.freeze_flow) return {"flow_codec"};
      return {"flow_codec", "flow_net"};
    case Stage::postproc_pretrain:
      return {"postproc"};
    case Stage::end_to_end: {
      std::vector<std::string> groups;
      for (const auto& g : CodecModel::group_names()) {
        if (!(config.freeze_flow && g == "flow_net")) groups.push_back(g);
      }
      return groups;
    }
  }
  throw ContractError("unknown stage");
}

TrainResult pretrain_image(CodecModel& model, const data::FrameDataset& dataset,
                           const TrainConfig& config, const LogSink& sink) {
  require_stage(config, Stage::image_pretrain);
  require_data(dataset, config, 1);
  Sampler sampler(dataset, config.augmentation, config.crop, config.seed);
  return run_loop(model, config, sink, [&](int, TrainResult&) {
    const Tensor batch = sampler.frames(config.batch_size);
    const Var x(batch);
    auto coded = gop::code_latent(model.image_codec(), x, gop::StreamKind::intra,
                                  entropy::QuantizerMode::noise, sampler.rng());
    const Var recon = config.joint_postproc ? model.postproc()(coded.decoded) : coded.decoded;
    const Var d = ops::mse(x, recon);
    const std::vector<Var> terms{d, coded.bits};
    const std::vector<float> weights{static_cast<float>(config.lambda),
                                     static_cast<float>(1.0 / pixels(batch))};
    const Var loss = ops::linear_combination(terms, weights);
    ag::backward(loss);
    StepRecord r;
    r.D = d.value()[0];
    r.R_image = coded.bits.value()[0] / pixels(batch);
    r.L = config.lambda * r.D + r.R_image;
    return r;
  });
}

TrainResult pretrain_flow_compression(CodecModel& model, const data::FrameDataset& dataset,
                                      const TrainConfig& config, const LogSink& sink) {
  require_stage(config, Stage::flow_compression_pretrain);
  require_data(dataset, config, 3);
  Sampler sampler(dataset, config.augmentation, config.crop, config.seed);
  return run_loop(model, config, sink, [&](int, TrainResult&) {
    const auto triplet = sampler.clip(config.batch_size, 3);
    const Var past(triplet[0]), current(triplet[1]), future(triplet[2]);
    const auto flows = motion::estimate_bidirectional_flow(past, future, current, model.flow_net());
    auto coded = gop::code_latent(model.flow_codec(), flows.packed(), gop::StreamKind::flow,
                                  entropy::QuantizerMode::noise, sampler.rng());
    const auto decoded = motion::FlowPair::unpack(coded.decoded);
    const Var d_past = ops::mse(motion::warp(past, decoded.past), current);
    const Var d_future = ops::mse(motion::warp(future, decoded.future), current);
    const float half_lambda = static_cast<float>(config.lambda / 2.0);
    const std::vector<Var> terms{d_past, d_future, coded.bits};
    const std::vector<float> weights{half_lambda, half_lambda,
                                     static_cast<float>(1.0 / pixels(triplet[1]))};
    ag::backward(ops::linear_combination(terms, weights));
    StepRecord r;
    r.D = 0.5 * (static_cast<double>(d_past.value()[0]) + d_future.value()[0]);
    r.R_flow = coded.bits.value()[0] / pixels(triplet[1]);
    r.L = config.lambda * r.D + r.R_flow;
    return r;
  });
}

TrainResult pretrain_postproc(CodecModel& model, const data::FrameDataset& dataset,
                              const TrainConfig& config, const LogSink& sink) {
  require_stage(config, Stage::postproc_pretrain);
  require_data(dataset, config, 1);
  Sampler sampler(dataset, config.augmentation, config.crop, config.seed);
  return run_loop(model, config, sink, [&](int, TrainResult&) {
    const Tensor batch = sampler.frames(config.batch_size);
    const Var x(batch);
    Var decoded;
    {
      ag::NoGradGuard guard;
      decoded = Var(gop::code_latent(model.image_codec(), x, gop::StreamKind::intra,
                                     entropy::QuantizerMode::noise, sampler.rng())
                        .decoded.value());
    }
    const Var d = ops::mse(x, model.postproc()(decoded));
    const std::vector<Var> terms{d};
    const std::vector<float> weights{static_cast<float>(config.lambda)};
    ag::backward(ops::linear_combination(terms, weights));
    StepRecord r;
    r.D = d.value()[0];
    r.L = config.lambda * r.D;
    return r;
  });
}

TrainResult train_end_to_end(CodecModel& model, const data::FrameDataset& dataset,
                             const TrainConfig& config, const LogSink& sink) {
  require_stage(config, Stage::end_to_end);
  require_data(dataset, config, config.gop_size + 1);
  Sampler sampler(dataset, config.augmentation, config.crop, config.seed);
  std::uniform_int_distribution<std::uint64_t> seeds;
  return run_loop(model, config, sink, [&](int step, TrainResult& result) {
    const auto frames = sampler.clip(config.batch_size, config.gop_size + 1);
    gop::EncodeOptions options;
    options.mode = entropy::QuantizerMode::noise;
    options.lambda = config.lambda;
    options.noise_seed = seeds(sampler.rng());
    const auto r = gop::encode_gop(frames, model, options);
    ag::backward(r.loss_var);
    if (step == 1) {
      result.audit = audit_gradients(model);
      const auto dead = result.audit.dead_groups();
      if (!dead.empty()) {
        std::string names;
        for (const auto& n : dead) names += (names.empty() ? "" : ", ") + n;
        throw ContractError("no gradient reaches module group(s): " + names);
      }
    }
    StepRecord rec;
    rec.D = r.loss.D;
    rec.R_image = r.loss.R_image;
    rec.R_flow = r.loss.R_flow;
    rec.R_residual = r.loss.R_residual;
    rec.L = r.loss.L;
    return rec;
  });
}

TrainResult run_stage(CodecModel& model, const data::FrameDataset& dataset,
                      const TrainConfig& config, const LogSink& sink) {
  switch (config.stage) {
    case Stage::image_pretrain:
      return pretrain_image(model, dataset, config, sink);
    case Stage::flow_compression_pretrain:
      return pretrain_flow_compression(model, dataset, config, sink);
    case Stage::postproc_pretrain:
      return pretrain_postproc(model, dataset, config, sink);
    case Stage::end_to_end:
      return train_end_to_end(model, dataset, config, sink);
  }
  throw ContractError("unknown stage");
}

std::vector<SweepPoint> lambda_sweep(const std::vector<double>& lambdas, const TrainConfig& base,
                                     const data::FrameDataset& train_set,
                                     const data::FrameDataset& eval_set,
                                     const ModelConfig& model_config, const CodecModel* initial,
                                     coder::SymbolCoder* coder, const LogSink& sink) {
  if (lambdas.size() < 2) throw ConfigError("a lambda sweep needs at least two values");
  if (!std::is_sorted(lambdas.begin(), lambdas.end()) ||
      std::adjacent_find(lambdas.begin(), lambdas.end()) != lambdas.end()) {
    throw ConfigError("lambda values must be strictly ascending");
  }
  std::vector<SweepPoint> out;
  for (const double lambda : lambdas) {
    auto annotate = [&](const std::string& what) {
      return "lambda " + std::to_string(lambda) + ": " + what;
    };
    try {
      std::unique_ptr<CodecModel> model =
          initial ? initial->clone() : std::make_unique<CodecModel>(model_config, base.seed);
      TrainConfig cfg = base;
      cfg.stage = Stage::end_to_end;
      cfg.lambda = lambda;
      SweepPoint p;
      p.training = train_end_to_end(*model, train_set, cfg, sink);
      p.eval = evaluate(*model, eval_set, cfg.gop_size, coder);
      p.point = {lambda, p.eval.bpp, p.eval.psnr};
      out.push_back(std::move(p));
    } catch (const ConfigError& e) {
      throw ConfigError(annotate(e.what()));
    } catch (const DataError& e) {
      throw DataError(annotate(e.what()));
    } catch (const ContractError& e) {
      throw ContractError(annotate(e.what()));
    } catch (const EnvironmentError& e) {
      throw EnvironmentError(annotate(e.what()));
    } catch (const DecodeError& e) {
      throw DecodeError(annotate(e.what()), e.unit());
    }
  }
  return out;
}

}  // namespace bgop::train
