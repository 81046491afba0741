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

#include "bgop/dataset.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>

#include "bgop/error.hpp"

namespace bgop::data {
namespace fs = std::filesystem;
namespace {

bool is_image(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".ppm";
}

std::vector<fs::path> sorted_images(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_image(e.path())) out.push_back(e.path());
  }
  std::sort(out.begin(), out.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

Tensor from_rgb8(const std::uint8_t* rgb, int height, int width) {
  Tensor t(Shape{1, 3, height, width});
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) t[c * plane + i] = static_cast<float>(rgb[3 * i + c]) / 255.0f;
  }
  return t;
}

// Skips whitespace and '#' comments, then reads one header integer.
int ppm_int(std::istream& in, const fs::path& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (!std::isspace(c)) {
      break;
    }
    c = in.get();
  }
  if (c == EOF || !std::isdigit(c)) throw DataError("malformed PPM header in " + path.string());
  int v = 0;
  while (c != EOF && std::isdigit(c)) {
    v = v * 10 + (c - '0');
    if (v > 65535) throw DataError("PPM header value too large in " + path.string());
    c = in.get();
  }
  return v;
}

Tensor read_ppm(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[2] = {};
  in.read(magic, 2);
  if (magic[0] != 'P' || magic[1] != '6') throw DataError("not a binary PPM: " + path.string());
  const int width = ppm_int(in, path);
  const int height = ppm_int(in, path);
  const int maxval = ppm_int(in, path);
  if (width < 1 || height < 1 || maxval < 1) throw DataError("bad PPM dims in " + path.string());
  const int bytes_per = maxval > 255 ? 2 : 1;
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(width) * height * 3 * bytes_per);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw DataError("truncated PPM data in " + path.string());
  }
  Tensor t(Shape{1, 3, height, width});
  const std::size_t plane = static_cast<std::size_t>(height) * width;
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      const std::size_t k = 3 * i + c;
      const int v = bytes_per == 2 ? (raw[2 * k] << 8) | raw[2 * k + 1] : raw[k];
      t[c * plane + i] = static_cast<float>(v) / static_cast<float>(maxval);
    }
  }
  return t;
}

Tensor read_png(const fs::path& path) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.c_str())) {
    throw DataError("cannot read PNG " + path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_RGB;
  std::vector<std::uint8_t> rgb(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, rgb.data(), 0, nullptr)) {
    const std::string why = image.message;
    png_image_free(&image);
    throw DataError("cannot decode PNG " + path.string() + ": " + why);
  }
  return from_rgb8(rgb.data(), static_cast<int>(image.height), static_cast<int>(image.width));
}

Sequence load_sequence(const std::string& name, const std::vector<fs::path>& files, int multiple) {
  Sequence seq;
  seq.name = name;
  seq.files = files;
  int raw_h = 0, raw_w = 0;
  for (const auto& f : files) {
    Tensor img = read_image(f);
    if (seq.frames.empty()) {
      raw_h = img.shape().h;
      raw_w = img.shape().w;
      seq.height = aligned_extent(raw_h, multiple);
      seq.width = aligned_extent(raw_w, multiple);
      if (seq.height == 0 || seq.width == 0) {
        throw DataError(f.string() + " is smaller than " + std::to_string(multiple) + " pixels");
      }
    } else if (img.shape().h != raw_h || img.shape().w != raw_w) {
      throw DataError(f.string() + " is " + std::to_string(img.shape().w) + "x" +
                      std::to_string(img.shape().h) + ", expected " + std::to_string(raw_w) + "x" +
                      std::to_string(raw_h));
    }
    seq.frames.push_back(center_crop(img, seq.height, seq.width));
  }
  return seq;
}

float quantize8(double v) {
  return static_cast<float>(std::clamp(std::round(v * 255.0), 0.0, 255.0) / 255.0);
}

}  // namespace

std::size_t FrameDataset::frame_count() const {
  std::size_t n = 0;
  for (const auto& s : sequences) n += s.frames.size();
  return n;
}

int aligned_extent(int extent, int multiple) {
  if (multiple < 1) throw ConfigError("crop multiple must be positive");
  return extent / multiple * multiple;
}

Tensor center_crop(const Tensor& frame, int height, int width) {
  const Shape s = frame.shape();
  if (height > s.h || width > s.w || height < 1 || width < 1) {
    throw ShapeError("cannot crop " + s.str() + " to " + std::to_string(height) + "x" +
                     std::to_string(width));
  }
  if (height == s.h && width == s.w) return frame;
  const int top = (s.h - height) / 2;
  const int left = (s.w - width) / 2;
  Tensor out(Shape{s.n, s.c, height, width});
  for (int n = 0; n < s.n; ++n) {
    for (int c = 0; c < s.c; ++c) {
      for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) out.at(n, c, y, x) = frame.at(n, c, y + top, x + left);
      }
    }
  }
  return out;
}

Tensor read_image(const fs::path& path) {
  if (!fs::is_regular_file(path)) throw DataError("no such image: " + path.string());
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".ppm") return read_ppm(path);
  if (ext == ".png") return read_png(path);
  throw DataError("unsupported image format: " + path.string());
}

void write_png(const fs::path& path, const Tensor& frame) {
  const Shape s = frame.shape();
  if (s.n != 1 || s.c != 3) throw ShapeError("write_png expects 1x3xHxW, got " + s.str());
  const std::size_t plane = s.plane();
  std::vector<std::uint8_t> rgb(plane * 3);
  for (std::size_t i = 0; i < plane; ++i) {
    for (int c = 0; c < 3; ++c) {
      rgb[3 * i + c] = static_cast<std::uint8_t>(
          std::clamp(std::round(static_cast<double>(frame[c * plane + i]) * 255.0), 0.0, 255.0));
    }
  }
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(s.w);
  image.height = static_cast<png_uint_32>(s.h);
  image.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&image, path.c_str(), 0, rgb.data(), 0, nullptr)) {
    throw DataError("cannot write PNG " + path.string() + ": " + image.message);
  }
}

FrameDataset load_frames(const fs::path& root, int multiple) {
  if (!fs::is_directory(root)) throw DataError("not a directory: " + root.string());
  FrameDataset ds;
  ds.root = root;
  const auto top = sorted_images(root);
  if (!top.empty()) {
    ds.sequences.push_back(load_sequence(root.filename().string(), top, multiple));
  } else {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(root)) {
      if (e.is_directory()) dirs.push_back(e.path());
    }
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      const auto files = sorted_images(d);
      if (!files.empty()) ds.sequences.push_back(load_sequence(d.filename().string(), files, multiple));
    }
  }
  if (ds.sequences.empty()) throw DataError("no PNG or PPM frames under " + root.string());
  const fs::path meta = root / "metadata.json";
  if (fs::is_regular_file(meta)) {
    std::ifstream in(meta);
    try {
      ds.metadata = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed " + meta.string() + ": " + e.what());
    }
  }
  return ds;
}

void write_dataset(const FrameDataset& dataset, const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) throw DataError("cannot create " + root.string() + ": " + ec.message());
  for (const auto& seq : dataset.sequences) {
    const fs::path dir = root / seq.name;
    fs::create_directories(dir, ec);
    if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
      char name[32];
      std::snprintf(name, sizeof(name), "%05zu.png", i);
      write_png(dir / name, seq.frames[i]);
    }
  }
  if (!dataset.metadata.is_null()) {
    std::ofstream out(root / "metadata.json");
    out << dataset.metadata.dump(2) << '\n';
    if (!out) throw DataError("cannot write metadata under " + root.string());
  }
}

FrameDataset make_synthetic_dataset(const SyntheticSpec& spec) {
  if (spec.width % kAlignment != 0 || spec.height % kAlignment != 0 || spec.width < 1 ||
      spec.height < 1) {
    throw ConfigError("synthetic dims must be positive multiples of 64");
  }
  if (spec.sequences < 1 || spec.frames < 1 || spec.shapes < 0) {
    throw ConfigError("synthetic dataset needs at least one sequence and frame");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  // Displacements are multiples of a quarter pixel so subpixel motion stays exact in metadata.
  auto velocity = [&] { return spec.still ? 0.0 : std::round(uniform(-3.0, 3.0) * 4.0) / 4.0; };

  FrameDataset ds;
  ds.metadata = {{"generator", "moving-shapes"},
                 {"seed", spec.seed},
                 {"width", spec.width},
                 {"height", spec.height},
                 {"frames", spec.frames},
                 {"still", spec.still},
                 {"sequences", nlohmann::json::array()}};
  const double W = spec.width, H = spec.height;
  for (int s = 0; s < spec.sequences; ++s) {
    struct Wave {
      double fx, fy, phase, amp;
    };
    std::array<std::array<Wave, 3>, 3> waves{};
    std::array<double, 3> base{};
    for (int c = 0; c < 3; ++c) {
      base[c] = uniform(0.25, 0.6);
      for (auto& w : waves[c]) {
        w = {uniform(-0.15, 0.15), uniform(-0.15, 0.15), uniform(0.0, 2 * std::numbers::pi),
             uniform(0.03, 0.1)};
      }
    }
    struct ShapeTrack {
      bool disc;
      double x0, y0, vx, vy, half_w, half_h;
      std::array<double, 3> color;
    };
    std::vector<ShapeTrack> shapes;
    nlohmann::json shape_meta = nlohmann::json::array();
    const double span = spec.frames - 1;
    for (int k = 0; k < spec.shapes; ++k) {
      ShapeTrack t{};
      t.disc = unit(rng) < 0.5;
      t.half_w = uniform(0.08, 0.18) * std::min(W, H);
      t.half_h = t.disc ? t.half_w : uniform(0.08, 0.18) * std::min(W, H);
      t.vx = velocity();
      t.vy = velocity();
      // Start so the whole track stays inside the frame when possible.
      auto start = [&](double extent, double half, double v) {
        const double lo = half - std::min(0.0, v * span);
        const double hi = extent - half - std::max(0.0, v * span);
        return hi > lo ? uniform(lo, hi) : extent / 2 - v * span / 2;
      };
      t.x0 = start(W, t.half_w, t.vx);
      t.y0 = start(H, t.half_h, t.vy);
      for (auto& c : t.color) c = uniform(0.05, 0.95);
      shapes.push_back(t);
      shape_meta.push_back({{"kind", t.disc ? "disc" : "rectangle"},
                            {"center0", {t.x0, t.y0}},
                            {"half_extent", {t.half_w, t.half_h}},
                            {"displacement_per_frame", {t.vx, t.vy}},
                            {"color", t.color}});
    }

    Sequence seq;
    char name[32];
    std::snprintf(name, sizeof(name), "seq%03d", s);
    seq.name = name;
    seq.width = spec.width;
    seq.height = spec.height;
    const std::size_t plane = static_cast<std::size_t>(spec.width) * spec.height;
    for (int f = 0; f < spec.frames; ++f) {
      std::vector<double> img(plane * 3);
      for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
          for (int c = 0; c < 3; ++c) {
            double v = base[c];
            for (const auto& w : waves[c]) v += w.amp * std::sin(w.fx * x + w.fy * y + w.phase);
            img[c * plane + static_cast<std::size_t>(y) * spec.width + x] = v;
          }
        }
      }
      // Shapes are composited with 4x4 supersampled coverage.
      for (const auto& t : shapes) {
        const double cx = t.x0 + t.vx * f, cy = t.y0 + t.vy * f;
        const int x_lo = std::max(0, static_cast<int>(std::floor(cx - t.half_w)) - 1);
        const int x_hi = std::min(spec.width - 1, static_cast<int>(std::ceil(cx + t.half_w)) + 1);
        const int y_lo = std::max(0, static_cast<int>(std::floor(cy - t.half_h)) - 1);
        const int y_hi = std::min(spec.height - 1, static_cast<int>(std::ceil(cy + t.half_h)) + 1);
        for (int y = y_lo; y <= y_hi; ++y) {
          for (int x = x_lo; x <= x_hi; ++x) {
            int hits = 0;
            for (int sy = 0; sy < 4; ++sy) {
              for (int sx = 0; sx < 4; ++sx) {
                const double px = x + (sx + 0.5) / 4.0 - cx;
                const double py = y + (sy + 0.5) / 4.0 - cy;
                const bool in = t.disc ? px * px + py * py <= t.half_w * t.half_w
                                       : std::abs(px) <= t.half_w && std::abs(py) <= t.half_h;
                hits += in ? 1 : 0;
              }
            }
            if (hits == 0) continue;
            const double a = hits / 16.0;
            for (int c = 0; c < 3; ++c) {
              double& v = img[c * plane + static_cast<std::size_t>(y) * spec.width + x];
              v = (1 - a) * v + a * t.color[c];
            }
          }
        }
      }
      Tensor frame(Shape{1, 3, spec.height, spec.width});
      for (std::size_t i = 0; i < img.size(); ++i) frame[i] = quantize8(img[i]);
      seq.frames.push_back(std::move(frame));
    }
    ds.metadata["sequences"].push_back({{"name", seq.name}, {"shapes", shape_meta}});
    ds.sequences.push_back(std::move(seq));
  }
  return ds;
}

}  // namespace bgop::data
