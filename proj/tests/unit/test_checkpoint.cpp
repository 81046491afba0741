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

#include <fstream>

#include "bgop/error.hpp"
#include "bgop/nn/checkpoint.hpp"
#include "fixtures.hpp"

namespace bgop::nn {
namespace {

using testing::tiny_config;

TEST(Checkpoint, ModelRoundTripIsBitwise) {
  testing::TempDir dir("ckpt");
  CodecModel model(tiny_config(), 21);
  save_model(dir.path() / "m.bgck", model);
  const auto back = load_model(dir.path() / "m.bgck");
  EXPECT_EQ(nlohmann::json(back->config()), nlohmann::json(model.config()));
  const auto a = model.parameters(), b = back->parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].name, b[i].name);
    EXPECT_EQ(a[i].var.value().to_vector(), b[i].var.value().to_vector()) << a[i].name;
  }
}

TEST(Checkpoint, HeaderLayout) {
  CodecModel model(tiny_config(), 22);
  const auto bytes = serialize_checkpoint(model, nlohmann::json{{"k", 1}});
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "BGCK");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5] | bytes[6] | bytes[7], 0);
  const std::string cfg = R"({"k":1})";
  EXPECT_EQ(bytes[8], cfg.size());
  EXPECT_EQ(std::string(bytes.begin() + 12, bytes.begin() + 12 + cfg.size()), cfg);
  const auto ck = parse_checkpoint(bytes);
  EXPECT_EQ(ck.tensors.size(), model.parameters().size());
}

TEST(Checkpoint, MissingKeyIsRejected) {
  CodecModel model(tiny_config(), 23);
  auto ck = parse_checkpoint(serialize_checkpoint(model, nlohmann::json(model.config())));
  const std::string victim = model.parameters().front().name;
  ck.tensors.erase(victim);
  try {
    load_weights(model, ck);
    FAIL() << "missing key accepted";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(victim), std::string::npos);
  }
}

TEST(Checkpoint, ShapeMismatchIsRejected) {
  CodecModel model(tiny_config(), 24);
  auto ck = parse_checkpoint(serialize_checkpoint(model, nlohmann::json(model.config())));
  const std::string victim = model.parameters().back().name;
  ck.tensors[victim] = Tensor(Shape{1, 1, 1, 3});
  EXPECT_THROW(load_weights(model, ck), ConfigError);

  auto wide = tiny_config();
  wide.hidden_channels += 4;
  CodecModel other(wide, 24);
  const auto ck2 = parse_checkpoint(serialize_checkpoint(other, nlohmann::json(wide)));
  EXPECT_THROW(load_weights(model, ck2), ConfigError);
}

TEST(Checkpoint, CorruptArchives) {
  CodecModel model(tiny_config(), 25);
  const auto bytes = serialize_checkpoint(model, nlohmann::json(model.config()));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(parse_checkpoint(bad_magic), ConfigError);
  auto bad_version = bytes;
  bad_version[4] = 2;
  EXPECT_THROW(parse_checkpoint(bad_version), ConfigError);
  for (std::size_t cut : {std::size_t{3}, std::size_t{11}, bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW(parse_checkpoint({bytes.begin(), bytes.begin() + cut}), ConfigError) << cut;
  }
  auto trailing = bytes;
  trailing.push_back(0);
  EXPECT_THROW(parse_checkpoint(trailing), ConfigError);

  testing::TempDir dir("ckpt_missing");
  EXPECT_THROW(load_model(dir.path() / "none.bgck"), DataError);
}

TEST(Checkpoint, NonFiniteWeightsAreRejected) {
  CodecModel model(tiny_config(), 26);
  auto ck = parse_checkpoint(serialize_checkpoint(model, nlohmann::json(model.config())));
  ck.tensors.begin()->second[0] = std::numeric_limits<float>::quiet_NaN();
  EXPECT_THROW(load_weights(model, ck), ConfigError);
}

}  // namespace
}  // namespace bgop::nn
