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

#include "bgop/dataset.hpp"
#include "bgop/error.hpp"
#include "fixtures.hpp"

namespace bgop::data {
namespace {

namespace fs = std::filesystem;
using testing::TempDir;

// Every pixel encodes its own coordinates so crops can be located exactly.
Tensor coordinate_frame(int h, int w) {
  Tensor t(Shape{1, 3, h, w});
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      t.at(0, 0, y, x) = static_cast<float>(y % 256) / 255.0f;
      t.at(0, 1, y, x) = static_cast<float>(x % 256) / 255.0f;
      t.at(0, 2, y, x) = static_cast<float>((x / 256) * 16 + y / 256) / 255.0f;
    }
  }
  return t;
}

void write_ppm(const fs::path& path, int h, int w, std::uint8_t seed) {
  std::ofstream out(path, std::ios::binary);
  out << "P6\n# comment\n" << w << " " << h << "\n255\n";
  for (int i = 0; i < h * w * 3; ++i) out.put(static_cast<char>((i * 7 + seed) & 0xff));
}

TEST(Alignment, LargestMultipleBelow) {
  EXPECT_EQ(aligned_extent(720), 704);
  EXPECT_EQ(aligned_extent(1280), 1280);
  EXPECT_EQ(aligned_extent(360), 320);
  EXPECT_EQ(aligned_extent(64), 64);
  EXPECT_EQ(aligned_extent(63), 0);
  EXPECT_EQ(aligned_extent(100, 16), 96);
}

TEST(Alignment, CenterCropOffsets) {
  const Tensor f = coordinate_frame(11, 9);
  const Tensor c = center_crop(f, 6, 4);
  ASSERT_EQ(c.shape(), (Shape{1, 3, 6, 4}));
  // margins 5 and 5: two before, three after
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 4; ++x) {
      for (int ch = 0; ch < 3; ++ch) EXPECT_EQ(c.at(0, ch, y, x), f.at(0, ch, y + 2, x + 2));
    }
  }
  EXPECT_THROW(center_crop(f, 12, 4), ShapeError);
}

struct CropCase {
  int h, w, want_h, want_w;
};

class LoadCrop : public ::testing::TestWithParam<CropCase> {};

TEST_P(LoadCrop, CentersOnAlignedExtent) {
  const auto p = GetParam();
  TempDir dir("crop");
  const Tensor f = coordinate_frame(p.h, p.w);
  write_png(dir.path() / "0000.png", f);
  const auto ds = load_frames(dir.path());
  ASSERT_EQ(ds.sequences.size(), 1u);
  const auto& seq = ds.sequences[0];
  EXPECT_EQ(seq.height, p.want_h);
  EXPECT_EQ(seq.width, p.want_w);
  ASSERT_EQ(seq.frames[0].shape(), (Shape{1, 3, p.want_h, p.want_w}));
  const int top = (p.h - p.want_h) / 2, left = (p.w - p.want_w) / 2;
  for (int y : {0, p.want_h / 2, p.want_h - 1}) {
    for (int x : {0, p.want_w / 3, p.want_w - 1}) {
      for (int c = 0; c < 3; ++c) {
        EXPECT_EQ(seq.frames[0].at(0, c, y, x), f.at(0, c, y + top, x + left)) << y << "," << x;
      }
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, LoadCrop,
                         ::testing::Values(CropCase{720, 1280, 704, 1280},
                                           CropCase{360, 640, 320, 640},
                                           CropCase{64, 64, 64, 64},
                                           CropCase{130, 200, 128, 192}));

TEST(Load, OrdersFramesAndSequencesByName) {
  TempDir dir("order");
  for (const char* seq : {"b", "a"}) {
    fs::create_directories(dir.path() / seq);
    for (int i : {10, 2, 1}) {
      char name[16];
      std::snprintf(name, sizeof(name), "%03d.png", i);
      Tensor f(Shape{1, 3, 64, 64}, static_cast<float>(i) / 255.0f);
      write_png(dir.path() / seq / name, f);
    }
  }
  fs::create_directories(dir.path() / "empty");
  const auto ds = load_frames(dir.path());
  ASSERT_EQ(ds.sequences.size(), 2u);
  EXPECT_EQ(ds.sequences[0].name, "a");
  EXPECT_EQ(ds.sequences[1].name, "b");
  for (const auto& seq : ds.sequences) {
    ASSERT_EQ(seq.frames.size(), 3u);
    EXPECT_EQ(seq.frames[0][0], 1.0f / 255.0f);
    EXPECT_EQ(seq.frames[1][0], 2.0f / 255.0f);
    EXPECT_EQ(seq.frames[2][0], 10.0f / 255.0f);
    EXPECT_EQ(seq.files[2].filename(), "010.png");
  }
  EXPECT_EQ(ds.frame_count(), 6u);
  EXPECT_TRUE(ds.metadata.is_null());
}

TEST(Load, ReadsBinaryPpm) {
  TempDir dir("ppm");
  write_ppm(dir.path() / "f0.ppm", 64, 65, 3);
  const Tensor img = read_image(dir.path() / "f0.ppm");
  ASSERT_EQ(img.shape(), (Shape{1, 3, 64, 65}));
  // interleaved RGB bytes become planar channels
  for (int y : {0, 17, 63}) {
    for (int x : {0, 40, 64}) {
      for (int c = 0; c < 3; ++c) {
        const int i = (y * 65 + x) * 3 + c;
        EXPECT_EQ(img.at(0, c, y, x), static_cast<float>((i * 7 + 3) & 0xff) / 255.0f);
      }
    }
  }
  const auto ds = load_frames(dir.path());
  EXPECT_EQ(ds.sequences[0].width, 64);
}

TEST(Load, ErrorsNameTheFile) {
  TempDir dir("errors");
  EXPECT_THROW(load_frames(dir.path() / "missing"), DataError);
  EXPECT_THROW(load_frames(dir.path()), DataError);

  write_png(dir.path() / "0.png", Tensor(Shape{1, 3, 64, 64}));
  write_png(dir.path() / "1.png", Tensor(Shape{1, 3, 64, 128}));
  try {
    load_frames(dir.path());
    FAIL() << "inconsistent sizes accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("1.png"), std::string::npos) << e.what();
  }

  TempDir small("small");
  write_png(small.path() / "tiny.png", Tensor(Shape{1, 3, 32, 128}));
  try {
    load_frames(small.path());
    FAIL() << "undersized frame accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("tiny.png"), std::string::npos) << e.what();
  }

  TempDir bad("corrupt");
  std::ofstream(bad.path() / "junk.png") << "not an image";
  try {
    load_frames(bad.path());
    FAIL() << "corrupt file accepted";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("junk.png"), std::string::npos) << e.what();
  }
}

TEST(Synthetic, DeterministicAndQuantized) {
  SyntheticSpec spec;
  spec.seed = 11;
  spec.sequences = 2;
  spec.frames = 3;
  const auto a = make_synthetic_dataset(spec);
  const auto b = make_synthetic_dataset(spec);
  ASSERT_EQ(a.sequences.size(), 2u);
  EXPECT_EQ(a.sequences[1].name, "seq001");
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t f = 0; f < 3; ++f) {
      EXPECT_EQ(a.sequences[s].frames[f].to_vector(), b.sequences[s].frames[f].to_vector());
      for (float v : a.sequences[s].frames[f].to_vector()) {
        EXPECT_EQ(std::round(v * 255.0f) / 255.0f, v);
      }
    }
  }
  EXPECT_EQ(a.metadata, b.metadata);
  spec.seed = 12;
  EXPECT_NE(make_synthetic_dataset(spec).sequences[0].frames[0].to_vector(),
            a.sequences[0].frames[0].to_vector());
}

TEST(Synthetic, RejectsUnalignedSizes) {
  SyntheticSpec spec;
  spec.width = 100;
  EXPECT_THROW(make_synthetic_dataset(spec), ConfigError);
}

TEST(Synthetic, StillSequencesRepeatFrames) {
  SyntheticSpec spec;
  spec.still = true;
  spec.sequences = 1;
  spec.frames = 4;
  const auto ds = make_synthetic_dataset(spec);
  for (int f = 1; f < 4; ++f) {
    EXPECT_EQ(ds.sequences[0].frames[f].to_vector(), ds.sequences[0].frames[0].to_vector());
  }
  for (const auto& shape : ds.metadata["sequences"][0]["shapes"]) {
    EXPECT_EQ(shape["displacement_per_frame"][0].get<double>(), 0.0);
    EXPECT_EQ(shape["displacement_per_frame"][1].get<double>(), 0.0);
  }
}

// The displacement in the metadata is recovered from the rendered frames: the
// shape's coverage is isolated against a render of the same seed without shapes
// and its centroid tracked over time.
TEST(Synthetic, DisplacementRecoverableFromFrames) {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    SyntheticSpec spec;
    spec.seed = seed;
    spec.sequences = 1;
    spec.frames = 5;
    spec.shapes = 1;
    const auto with = make_synthetic_dataset(spec);
    spec.shapes = 0;
    const auto without = make_synthetic_dataset(spec);
    const auto& meta = with.metadata["sequences"][0]["shapes"][0];
    const double vx = meta["displacement_per_frame"][0], vy = meta["displacement_per_frame"][1];
    EXPECT_EQ(std::round(vx * 4) / 4, vx);
    EXPECT_EQ(std::round(vy * 4) / 4, vy);
    const double hx = meta["half_extent"][0], hy = meta["half_extent"][1];
    const double x0 = meta["center0"][0], y0 = meta["center0"][1];
    const double span = spec.frames - 1;
    const bool inside = std::min(x0, x0 + vx * span) - hx > 1 &&
                        std::max(x0, x0 + vx * span) + hx < spec.width - 1 &&
                        std::min(y0, y0 + vy * span) - hy > 1 &&
                        std::max(y0, y0 + vy * span) + hy < spec.height - 1;
    if (!inside) continue;
    std::array<double, 3> color;
    for (int c = 0; c < 3; ++c) color[c] = meta["color"][c];

    auto centroid = [&](int f) {
      const Tensor& img = with.sequences[0].frames[f];
      const Tensor& bg = without.sequences[0].frames[0];
      double sa = 0, sx = 0, sy = 0;
      for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
          double num = 0, den = 0;
          for (int c = 0; c < 3; ++c) {
            const double d = color[c] - bg.at(0, c, y, x);
            num += (img.at(0, c, y, x) - bg.at(0, c, y, x)) * d;
            den += d * d;
          }
          if (den < 0.01) continue;
          const double a = std::clamp(num / den, 0.0, 1.0);
          if (a < 0.02) continue;
          sa += a;
          sx += a * (x + 0.5);
          sy += a * (y + 0.5);
        }
      }
      return std::pair{sx / sa, sy / sa};
    };
    const auto [cx0, cy0] = centroid(0);
    EXPECT_NEAR(cx0, x0, 0.5) << "seed " << seed;
    EXPECT_NEAR(cy0, y0, 0.5) << "seed " << seed;
    for (int f = 1; f < spec.frames; ++f) {
      const auto [cx, cy] = centroid(f);
      EXPECT_NEAR(cx - cx0, vx * f, 0.15) << "seed " << seed << " frame " << f;
      EXPECT_NEAR(cy - cy0, vy * f, 0.15) << "seed " << seed << " frame " << f;
    }
    ++checked;
  }
  EXPECT_GE(checked, 4);
}

TEST(Synthetic, WriteThenLoadIsExact) {
  SyntheticSpec spec;
  spec.seed = 5;
  spec.sequences = 2;
  spec.frames = 3;
  spec.width = 192;
  const auto ds = make_synthetic_dataset(spec);
  TempDir dir("roundtrip");
  write_dataset(ds, dir.path());
  const auto back = load_frames(dir.path());
  ASSERT_EQ(back.sequences.size(), 2u);
  for (std::size_t s = 0; s < 2; ++s) {
    EXPECT_EQ(back.sequences[s].name, ds.sequences[s].name);
    ASSERT_EQ(back.sequences[s].frames.size(), 3u);
    for (std::size_t f = 0; f < 3; ++f) {
      EXPECT_EQ(back.sequences[s].frames[f].to_vector(), ds.sequences[s].frames[f].to_vector());
    }
  }
  EXPECT_EQ(back.metadata, ds.metadata);
}

}  // namespace
}  // namespace bgop::data
