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

#include "commands.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "bgop/baseline.hpp"
#include "bgop/coder.hpp"
#include "bgop/dataset.hpp"
#include "bgop/error.hpp"
#include "bgop/evaluate.hpp"
#include "bgop/metrics.hpp"
#include "bgop/nn/checkpoint.hpp"
#include "bgop/stream.hpp"
#include "bgop/train.hpp"

namespace bgop::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct TrainArgs {
  std::string stage = "end_to_end";
  fs::path data;
  std::optional<double> lambda;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  fs::path config;
  fs::path init;
  fs::path out = "model.bgck";
  fs::path log;
  std::string preset = "desk";
};

struct EncodeArgs {
  fs::path model, input, output;
  int gop = 4;
  std::string coder;
};

struct DecodeArgs {
  fs::path model, input, output;
  std::string coder;
};

struct EvalArgs {
  fs::path model, data;
  int gop = 4;
  std::string coder;
  bool estimate = false;
};

struct RdArgs {
  std::vector<double> lambdas;
  fs::path data, eval_data, out = "rd.csv", init, config, log;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  std::string coder;
  bool estimate = false;
};

struct BaselineArgs {
  std::string codec = "x264";
  fs::path data;
  int gop = 4;
  std::string preset = "ultrafast";
  std::vector<int> crfs{38, 33, 28, 23};
  std::string ffmpeg = "ffmpeg";
};

struct SynthArgs {
  std::uint64_t seed = 0;
  fs::path out;
  int sequences = 4, frames = 9, width = 128, height = 128, shapes = 3;
  bool still = false;
};

std::optional<std::string> library_arg(const std::string& s) {
  if (s.empty()) return std::nullopt;
  return s;
}

train::TrainConfig load_train_config(const fs::path& file, train::Stage stage, bool full) {
  train::TrainConfig c = full ? train::TrainConfig::full(stage) : train::TrainConfig::desk(stage);
  if (file.empty()) return c;
  std::ifstream in(file);
  if (!in) throw DataError("cannot open config " + file.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config " + file.string() + ": " + e.what());
  }
  if (!j.contains("stage")) j["stage"] = train::to_string(stage);
  return j.get<train::TrainConfig>();
}

ModelConfig model_preset(const std::string& name) {
  if (name == "desk") return ModelConfig::desk();
  if (name == "full") return ModelConfig::full();
  throw ConfigError("unknown preset '" + name + "' (desk or full)");
}

json eval_json(const EvalResult& r) {
  json seqs = json::array();
  for (const auto& s : r.sequences) {
    seqs.push_back({{"name", s.name},
                    {"frames", s.frames},
                    {"width", s.width},
                    {"height", s.height},
                    {"bits", s.bits},
                    {"estimated_bits", s.estimated_bits},
                    {"bpp", s.bpp},
                    {"psnr", s.psnr},
                    {"frame_psnr", s.frame_psnr}});
  }
  return {{"bpp", r.bpp},
          {"psnr", r.psnr},
          {"mse", r.mse},
          {"bits", r.measured ? "bgp" : "estimate"},
          {"sequences", seqs}};
}

int cmd_train(const TrainArgs& a) {
  const train::Stage stage = train::parse_stage(a.stage);
  train::TrainConfig cfg = load_train_config(a.config, stage, a.preset == "full");
  cfg.stage = stage;
  if (a.lambda) cfg.lambda = *a.lambda;
  if (a.steps) cfg.steps = *a.steps;
  if (a.seed) cfg.seed = *a.seed;
  cfg.validate();
  const auto dataset = data::load_frames(a.data);
  std::unique_ptr<CodecModel> model =
      a.init.empty() ? std::make_unique<CodecModel>(model_preset(a.preset), cfg.seed)
                     : nn::load_model(a.init);
  std::optional<train::JsonlLog> log;
  if (!a.log.empty()) log.emplace(a.log);
  const auto result = train::run_stage(*model, dataset, cfg, [&](const train::StepRecord& r) {
    if (log) (*log)(r);
  });
  nn::save_model(a.out, *model);
  std::cout << json{{"stage", a.stage},
                    {"steps", cfg.steps},
                    {"initial_smoothed_loss", result.initial_smoothed},
                    {"final_smoothed_loss", result.final_smoothed},
                    {"checkpoint", a.out.string()}}
                   .dump()
            << '\n';
  return kOk;
}

int cmd_encode(const EncodeArgs& a) {
  const auto model = nn::load_model(a.model);
  const auto dataset = data::load_frames(a.input, model->config().alignment());
  if (dataset.sequences.size() != 1) {
    throw DataError(a.input.string() + " holds " + std::to_string(dataset.sequences.size()) +
                    " sequences; encode takes one");
  }
  auto coder = coder::load_coder(library_arg(a.coder));
  const auto coding = stream::encode_sequence(dataset.sequences[0].frames, *model, a.gop);
  const auto bytes = stream::write_stream(coding, *model, *coder);
  std::ofstream out(a.output, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("cannot write " + a.output.string());
  const double bits = 8.0 * static_cast<double>(bytes.size());
  std::cout << json{{"frames", coding.frame_count()},
                    {"bytes", bytes.size()},
                    {"bpp", metrics::bpp(bits, coding.frame_count(), coding.height, coding.width)},
                    {"psnr", metrics::psnr_from_mse(coding.mse)}}
                   .dump()
            << '\n';
  return kOk;
}

int cmd_decode(const DecodeArgs& a) {
  const auto model = nn::load_model(a.model);
  std::ifstream in(a.input, std::ios::binary);
  if (!in) throw DataError("cannot open " + a.input.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  auto coder = coder::load_coder(library_arg(a.coder));
  const auto frames = stream::decode_stream(bytes, *model, *coder);
  fs::create_directories(a.output);
  char name[32];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    std::snprintf(name, sizeof name, "%05zu.png", i);
    data::write_png(a.output / name, frames[i]);
  }
  std::cout << json{{"frames", frames.size()}, {"output", a.output.string()}}.dump() << '\n';
  return kOk;
}

int cmd_eval(const EvalArgs& a) {
  const auto model = nn::load_model(a.model);
  const auto dataset = data::load_frames(a.data, model->config().alignment());
  std::unique_ptr<coder::SymbolCoder> coder;
  if (!a.estimate) coder = coder::load_coder(library_arg(a.coder));
  const auto r = evaluate(*model, dataset, a.gop, coder.get());
  std::cout << eval_json(r).dump(2) << '\n';
  return kOk;
}

int cmd_rd(const RdArgs& a) {
  train::TrainConfig cfg = load_train_config(a.config, train::Stage::end_to_end, false);
  if (a.steps) cfg.steps = *a.steps;
  if (a.seed) cfg.seed = *a.seed;
  const auto train_set = data::load_frames(a.data);
  const auto eval_set = a.eval_data.empty() ? train_set : data::load_frames(a.eval_data);
  std::unique_ptr<CodecModel> initial;
  if (!a.init.empty()) initial = nn::load_model(a.init);
  const ModelConfig mc = initial ? initial->config() : ModelConfig::desk();
  std::unique_ptr<coder::SymbolCoder> coder;
  if (!a.estimate) coder = coder::load_coder(library_arg(a.coder));
  std::optional<train::JsonlLog> log;
  if (!a.log.empty()) log.emplace(a.log);
  const auto sweep = train::lambda_sweep(a.lambdas, cfg, train_set, eval_set, mc, initial.get(),
                                         coder.get(), [&](const train::StepRecord& r) {
                                           if (log) (*log)(r);
                                         });
  std::vector<metrics::RdPoint> points;
  for (const auto& p : sweep) points.push_back(p.point);
  metrics::emit_rd_curve(points, a.out);
  std::cout << metrics::format_rd_curve(points);
  return kOk;
}

int cmd_baseline(const BaselineArgs& a) {
  baseline::BaselineOptions o;
  o.codec = baseline::parse_codec(a.codec);
  o.gop = a.gop;
  o.preset = a.preset;
  o.crfs = a.crfs;
  o.ffmpeg = a.ffmpeg;
  const auto dataset = data::load_frames(a.data);
  json rows = json::array();
  for (const auto& r : baseline::run_baseline(dataset, o)) {
    rows.push_back({{"codec", baseline::to_string(r.codec)},
                    {"preset", r.preset},
                    {"gop", r.gop},
                    {"crf", r.crf},
                    {"bpp", r.bpp},
                    {"psnr", r.psnr}});
  }
  std::cout << rows.dump(2) << '\n';
  return kOk;
}

int cmd_synth(const SynthArgs& a) {
  data::SyntheticSpec s;
  s.seed = a.seed;
  s.sequences = a.sequences;
  s.frames = a.frames;
  s.width = a.width;
  s.height = a.height;
  s.shapes = a.shapes;
  s.still = a.still;
  data::write_dataset(data::make_synthetic_dataset(s), a.out);
  std::cout << json{{"sequences", a.sequences}, {"frames", a.frames}, {"out", a.out.string()}}.dump()
            << '\n';
  return kOk;
}

int report(const char* kind, const std::exception& e, int code) {
  std::cerr << "bgop: " << kind << ": " << e.what() << '\n';
  return code;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Learned bidirectional video codec"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train one stage and write a checkpoint");
  train->add_option("--stage", ta.stage, "image_pretrain | flow_compression_pretrain | "
                                         "postproc_pretrain | end_to_end")
      ->capture_default_str();
  train->add_option("--data", ta.data, "Training frames")->required();
  train->add_option("--lambda", ta.lambda);
  train->add_option("--steps", ta.steps);
  train->add_option("--seed", ta.seed);
  train->add_option("--config", ta.config, "JSON training config");
  train->add_option("--init", ta.init, "Start from this checkpoint");
  train->add_option("--out", ta.out)->capture_default_str();
  train->add_option("--log", ta.log, "Per-step JSONL log");
  train->add_option("--preset", ta.preset, "desk | full")->capture_default_str();

  EncodeArgs ea;
  auto* encode = app.add_subcommand("encode", "Compress one frame sequence to .bgp");
  encode->add_option("--model", ea.model)->required();
  encode->add_option("--input", ea.input)->required();
  encode->add_option("--output", ea.output)->required();
  encode->add_option("--gop", ea.gop)->capture_default_str();
  encode->add_option("--coder", ea.coder, "Range coder library");

  DecodeArgs da;
  auto* decode = app.add_subcommand("decode", "Decode a .bgp stream to PNG frames");
  decode->add_option("--model", da.model)->required();
  decode->add_option("--input", da.input)->required();
  decode->add_option("--output", da.output)->required();
  decode->add_option("--coder", da.coder, "Range coder library");

  EvalArgs va;
  auto* eval = app.add_subcommand("eval", "Report bpp and PSNR over a dataset");
  eval->add_option("--model", va.model)->required();
  eval->add_option("--data", va.data)->required();
  eval->add_option("--gop", va.gop)->capture_default_str();
  eval->add_option("--coder", va.coder, "Range coder library");
  eval->add_flag("--estimate", va.estimate, "Use entropy-model bits; no range coder needed");

  RdArgs ra;
  auto* rd = app.add_subcommand("rd", "Lambda sweep to an RD curve");
  rd->add_option("--lambdas", ra.lambdas)->required()->delimiter(',');
  rd->add_option("--data", ra.data)->required();
  rd->add_option("--eval-data", ra.eval_data);
  rd->add_option("--out", ra.out)->capture_default_str();
  rd->add_option("--init", ra.init, "Fine-tune every point from this checkpoint");
  rd->add_option("--config", ra.config, "JSON training config");
  rd->add_option("--steps", ra.steps);
  rd->add_option("--seed", ra.seed);
  rd->add_option("--log", ra.log);
  rd->add_option("--coder", ra.coder);
  rd->add_flag("--estimate", ra.estimate);

  BaselineArgs ba;
  auto* base = app.add_subcommand("baseline", "Run x264/x265 through ffmpeg");
  base->add_option("--codec", ba.codec)->check(CLI::IsMember({"x264", "x265"}))->capture_default_str();
  base->add_option("--data", ba.data)->required();
  base->add_option("--gop", ba.gop)->capture_default_str();
  base->add_option("--preset", ba.preset)->capture_default_str();
  base->add_option("--crf", ba.crfs)->delimiter(',');
  base->add_option("--ffmpeg", ba.ffmpeg)->capture_default_str();

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Write the moving-shapes dataset");
  synth->add_option("--seed", sa.seed)->capture_default_str();
  synth->add_option("--out", sa.out)->required();
  synth->add_option("--sequences", sa.sequences)->capture_default_str();
  synth->add_option("--frames", sa.frames)->capture_default_str();
  synth->add_option("--width", sa.width)->capture_default_str();
  synth->add_option("--height", sa.height)->capture_default_str();
  synth->add_option("--shapes", sa.shapes)->capture_default_str();
  synth->add_flag("--still", sa.still);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*train) return cmd_train(ta);
    if (*encode) return cmd_encode(ea);
    if (*decode) return cmd_decode(da);
    if (*eval) return cmd_eval(va);
    if (*rd) return cmd_rd(ra);
    if (*base) return cmd_baseline(ba);
    if (*synth) return cmd_synth(sa);
  } catch (const EnvironmentError& e) {
    return report("environment", e, kEnvironment);
  } catch (const DataError& e) {
    return report("data", e, kData);
  } catch (const DecodeError& e) {
    return report("decode", e, kDecode);
  } catch (const ContainerError& e) {
    return report("decode", e, kDecode);
  } catch (const ConfigError& e) {
    return report("usage", e, kUsage);
  } catch (const Error& e) {
    return report("error", e, kUsage);
  } catch (const std::filesystem::filesystem_error& e) {
    return report("data", e, kData);
  }
  return kUsage;
}

}  // namespace bgop::cli
