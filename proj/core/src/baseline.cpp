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

#include "bgop/baseline.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <random>
#include <sstream>

#include "bgop/error.hpp"
#include "bgop/metrics.hpp"

extern char** environ;

namespace bgop::baseline {
namespace fs = std::filesystem;
namespace {

int run(const std::vector<std::string>& args) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_addopen(&actions, STDOUT_FILENO, "/dev/null", O_WRONLY, 0);
  posix_spawn_file_actions_addopen(&actions, STDERR_FILENO, "/dev/null", O_WRONLY, 0);
  pid_t pid = 0;
  const int rc = posix_spawnp(&pid, argv[0], &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  if (rc != 0) throw EnvironmentError("baseline codec unavailable: cannot start " + args[0]);
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("bgop-baseline-" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

}  // namespace

Codec parse_codec(const std::string& name) {
  if (name == "x264") return Codec::x264;
  if (name == "x265") return Codec::x265;
  throw ConfigError("unknown baseline codec '" + name + "' (expected x264 or x265)");
}

std::string to_string(Codec codec) { return codec == Codec::x264 ? "x264" : "x265"; }

std::vector<std::string> encode_command(const BaselineOptions& o, int crf,
                                        const fs::path& frame_pattern, const fs::path& output) {
  if (o.gop < 1) throw ConfigError("baseline GOP must be positive");
  const std::string g = std::to_string(o.gop);
  std::vector<std::string> cmd{o.ffmpeg, "-y", "-loglevel", "error", "-framerate", "25",
                               "-i", frame_pattern.string()};
  if (o.codec == Codec::x264) {
    cmd.insert(cmd.end(), {"-c:v", "libx264", "-preset", o.preset, "-crf", std::to_string(crf),
                           "-g", g, "-keyint_min", g, "-sc_threshold", "0", "-flags", "+cgop"});
  } else {
    cmd.insert(cmd.end(), {"-c:v", "libx265", "-preset", o.preset, "-crf", std::to_string(crf),
                           "-g", g, "-x265-params",
                           "keyint=" + g + ":min-keyint=" + g + ":scenecut=0:open-gop=0"});
  }
  cmd.insert(cmd.end(), {"-pix_fmt", "yuv420p", output.string()});
  return cmd;
}

std::vector<std::string> decode_command(const BaselineOptions& o, const fs::path& input,
                                        const fs::path& frame_pattern) {
  return {o.ffmpeg, "-y", "-loglevel", "error", "-i", input.string(), frame_pattern.string()};
}

fs::path find_program(const std::string& name) {
  if (name.find('/') != std::string::npos) {
    return access(name.c_str(), X_OK) == 0 ? fs::path(name) : fs::path();
  }
  const char* path = std::getenv("PATH");
  if (path == nullptr) return {};
  std::stringstream dirs(path);
  std::string dir;
  while (std::getline(dirs, dir, ':')) {
    const fs::path candidate = fs::path(dir.empty() ? "." : dir) / name;
    if (access(candidate.c_str(), X_OK) == 0) return candidate;
  }
  return {};
}

std::vector<BaselineResult> run_baseline(const data::FrameDataset& dataset,
                                         const BaselineOptions& options) {
  if (find_program(options.ffmpeg).empty()) {
    throw EnvironmentError("baseline codec unavailable: '" + options.ffmpeg + "' not found");
  }
  if (dataset.empty()) throw DataError("baseline dataset is empty");
  std::vector<BaselineResult> results;
  for (const int crf : options.crfs) {
    double bits = 0.0, pixels = 0.0, sse = 0.0, samples = 0.0;
    for (const auto& seq : dataset.sequences) {
      TempDir tmp;
      for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "in%05zu.png", i);
        data::write_png(tmp.path() / name, seq.frames[i]);
      }
      const fs::path video = tmp.path() / (options.codec == Codec::x264 ? "out.mp4" : "out.mkv");
      if (run(encode_command(options, crf, tmp.path() / "in%05d.png", video)) != 0) {
        throw EnvironmentError("baseline codec unavailable: " + to_string(options.codec) +
                               " encode failed");
      }
      if (run(decode_command(options, video, tmp.path() / "out%05d.png")) != 0) {
        throw EnvironmentError("baseline decode failed for " + video.string());
      }
      std::vector<Tensor> decoded;
      for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "out%05zu.png", i + 1);
        decoded.push_back(data::read_image(tmp.path() / name));
      }
      const double n = static_cast<double>(seq.frames.size()) * seq.height * seq.width;
      bits += 8.0 * static_cast<double>(fs::file_size(video));
      pixels += n;
      sse += metrics::mse(seq.frames, decoded) * 3.0 * n;
      samples += 3.0 * n;
    }
    results.push_back({options.codec, options.preset, options.gop, crf, bits / pixels,
                       metrics::psnr_from_mse(sse / samples)});
  }
  return results;
}

}  // namespace bgop::baseline
