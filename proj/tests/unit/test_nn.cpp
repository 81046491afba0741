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
#include <set>

#include "bgop/error.hpp"
#include "bgop/kernels.hpp"
#include "bgop/nn/networks.hpp"
#include "bgop/ops.hpp"
#include "fixtures.hpp"

namespace bgop {
namespace {

using ag::Var;

TEST(Gdn, ZeroGammaUnitBetaIsIdentity) {
  const Shape s{1, 3, 2, 2};
  const auto x = testing::random_tensor(s, 1, -3, 3);
  std::vector<double> xd(x.data().begin(), x.data().end()), y(xd.size());
  const std::vector<double> beta(3, 1.0), gamma(9, 0.0);
  kernels::gdn_forward<double>(xd, s, beta, gamma, false, y);
  for (std::size_t i = 0; i < xd.size(); ++i) EXPECT_EQ(y[i], xd[i]);
}

TEST(Gdn, SingleChannelValue) {
  const std::vector<double> x{2.0}, beta{1.0}, gamma{1.0};
  std::vector<double> y(1);
  kernels::gdn_forward<double>(x, Shape{}, beta, gamma, false, y);
  EXPECT_NEAR(y[0], 2.0 / std::sqrt(5.0), 1e-15);
  EXPECT_NEAR(y[0], 0.894427, 1e-6);
  kernels::gdn_forward<double>(x, Shape{}, beta, gamma, true, y);
  EXPECT_NEAR(y[0], 2.0 * std::sqrt(5.0), 1e-14);
}

TEST(Gdn, InverseUndoesForwardInDouble) {
  // With cross terms the normalizer depends on x, so the inverse multiplies by
  // the norm evaluated at the original input.
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3), pos(0.1, 2.0);
  const int c = 4;
  const Shape s{2, c, 3, 3};
  std::vector<double> x(s.numel()), beta(c), gamma(c * c);
  for (auto& v : x) v = u(rng);
  for (auto& v : beta) v = pos(rng);
  for (auto& v : gamma) v = pos(rng) * 0.5;
  std::vector<double> y(x.size()), back(x.size());
  kernels::gdn_forward<double>(x, s, beta, gamma, false, y);
  const std::size_t plane = s.plane();
  for (int n = 0; n < s.n; ++n)
    for (std::size_t p = 0; p < plane; ++p)
      for (int i = 0; i < c; ++i) {
        double norm = beta[i];
        for (int j = 0; j < c; ++j) {
          const double xj = x[(static_cast<std::size_t>(n) * c + j) * plane + p];
          norm += gamma[i * c + j] * xj * xj;
        }
        const std::size_t idx = (static_cast<std::size_t>(n) * c + i) * plane + p;
        back[idx] = y[idx] * std::sqrt(norm);
      }
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(back[i], x[i], 1e-6 * std::abs(x[i]) + 1e-15);
}

TEST(Gdn, IgdnOfGdnWithoutCrossTerms) {
  // gamma = 0 makes the normalizer independent of x, so the kernels compose exactly.
  const Shape s{1, 3, 4, 4};
  const auto x = testing::random_tensor(s, 2, -3, 3);
  std::vector<double> xd(x.data().begin(), x.data().end()), y(xd.size()), back(xd.size());
  const std::vector<double> beta{0.5, 1.0, 2.5}, gamma(9, 0.0);
  kernels::gdn_forward<double>(xd, s, beta, gamma, false, y);
  kernels::gdn_forward<double>(y, s, beta, gamma, true, back);
  for (std::size_t i = 0; i < xd.size(); ++i) EXPECT_NEAR(back[i], xd[i], 1e-12 * std::abs(xd[i]));
}

TEST(Gdn, ReparameterizedParametersStayPositive) {
  const Tensor raw(Shape{1, 1, 1, 4}, {-50.0f, -1.0f, 0.0f, 3.0f});
  const Tensor eff = ops::gdn_effective(raw);
  for (float v : eff.data()) EXPECT_GT(v, 0.0f);
  EXPECT_NEAR(ops::gdn_effective(Tensor::scalar(ops::gdn_raw_from_effective(0.7f)))[0], 0.7f, 1e-5);
}

TEST(Gdn, ModuleMatchesKernelOnEffectiveParameters) {
  nn::Gdn gdn(3, false);
  const Tensor x = testing::random_tensor(Shape{1, 3, 4, 4}, 5, -2, 2);
  const Var y = gdn(Var(x));
  std::vector<double> xd(x.data().begin(), x.data().end()), yd(xd.size());
  const Tensor beta = gdn.beta(), gamma = gdn.gamma();
  std::vector<double> bd(beta.data().begin(), beta.data().end());
  std::vector<double> gd(gamma.data().begin(), gamma.data().end());
  kernels::gdn_forward<double>(xd, x.shape(), bd, gd, false, yd);
  for (std::size_t i = 0; i < yd.size(); ++i) EXPECT_NEAR(y.value()[i], yd[i], 1e-5);
}

class Autoencoder : public ::testing::Test {
 protected:
  nn::AutoencoderConfig config(int channels) {
    nn::AutoencoderConfig c;
    c.input_channels = channels;
    c.hidden_channels = 8;
    c.latent_channels = 12;
    c.hyper_channels = 6;
    return c;
  }
  nn::Rng rng{4};
};

TEST_F(Autoencoder, LatentShapes) {
  for (int channels : {3, 4}) {
    nn::CompressionNet net(config(channels), rng);
    const Var x(testing::random_tensor(Shape{1, channels, 64, 64}, 6));
    const Var y = net.analysis()(x);
    EXPECT_EQ(y.shape(), (Shape{1, 12, 4, 4}));
    const Var z = net.hyper_analysis()(y);
    EXPECT_EQ(z.shape(), (Shape{1, 6, 1, 1}));
    const auto field = net.hyper_synthesis()(z);
    EXPECT_EQ(field.mu.shape(), y.shape());
    EXPECT_EQ(field.scale.shape(), y.shape());
    EXPECT_EQ(net.synthesis()(y).shape(), (Shape{1, channels, 64, 64}));
  }
}

TEST_F(Autoencoder, DefaultLayoutLatent) {
  nn::AutoencoderConfig c;
  c.hidden_channels = 96;
  c.latent_channels = 192;
  nn::CompressionNet net(c, rng);
  EXPECT_EQ(net.analysis().latent_shape(Shape{1, 3, 64, 64}), (Shape{1, 192, 4, 4}));
  EXPECT_EQ(c.alignment(), 64);
}

TEST_F(Autoencoder, ScaleRespectsFloor) {
  nn::CompressionNet net(config(3), rng);
  const Var z(testing::random_tensor(Shape{1, 6, 2, 2}, 7, -40, 40));
  const auto field = net.hyper_synthesis()(z);
  for (float v : field.scale.value().data()) EXPECT_GE(v, 0.01f);
}

TEST_F(Autoencoder, RejectsUnalignedInput) {
  nn::CompressionNet net(config(3), rng);
  EXPECT_THROW(net.analysis()(Var(Tensor(Shape{1, 3, 40, 64}))), ShapeError);
  EXPECT_THROW(net.hyper_analysis()(Var(Tensor(Shape{1, 12, 6, 4}))), ShapeError);
}

TEST_F(Autoencoder, ForwardIsDeterministic) {
  nn::CompressionNet net(config(3), rng);
  ag::NoGradGuard guard;
  const Var x(testing::random_tensor(Shape{1, 3, 64, 64}, 8));
  EXPECT_TRUE(bitwise_equal(net.synthesis()(net.analysis()(x)).value(),
                            net.synthesis()(net.analysis()(x)).value()));
}

TEST(MaskUNet, ShapeAndRange) {
  nn::Rng rng(1);
  nn::MaskUNet net(6, rng);
  const Var a(testing::random_tensor(Shape{1, 3, 64, 64}, 1));
  const Var b(testing::random_tensor(Shape{1, 3, 64, 64}, 2));
  const Var m = net(a, b);
  EXPECT_EQ(m.shape(), (Shape{1, 1, 64, 64}));
  for (float v : m.value().data()) {
    EXPECT_GT(v, 0.0f);
    EXPECT_LT(v, 1.0f);
  }
  net.zero_output_layer();
  const Var half = net(a, b);
  for (float v : half.value().data()) EXPECT_EQ(v, 0.5f);
}

TEST(FlowPyramid, ZeroOutputLayersGiveZeroFlow) {
  nn::Rng rng(2);
  nn::FlowPyramid net(3, {8, 8}, rng);
  net.zero_output_layers();
  const Var ref(testing::random_tensor(Shape{1, 3, 64, 64}, 3));
  const Var cur(testing::random_tensor(Shape{1, 3, 64, 64}, 4));
  const Var flow = net(ref, cur);
  EXPECT_EQ(flow.shape(), (Shape{1, 2, 64, 64}));
  EXPECT_EQ(flow.value().max_abs(), 0.0f);
}

TEST(FlowPyramid, CoarsestLevelExtent) {
  nn::Rng rng(3);
  nn::FlowPyramid net(3, {8}, rng);
  const Shape coarse = net.coarsest_extent(Shape{1, 3, 64, 64});
  EXPECT_EQ(coarse.h, 16);
  EXPECT_EQ(coarse.w, 16);
  EXPECT_THROW(net(Var(Tensor(Shape{1, 3, 66, 64})), Var(Tensor(Shape{1, 3, 66, 64}))),
               ShapeError);
}

TEST(PostProcessor, ZeroResidualPathsIsIdentity) {
  nn::Rng rng(4);
  nn::PostProcessor net(64, 12, rng);
  EXPECT_EQ(net.block_count(), 12);
  net.zero_residual_paths();
  const Tensor x = testing::random_tensor(Shape{1, 3, 64, 64}, 5);
  const Var y = net(Var(x));
  EXPECT_EQ(y.shape(), x.shape());
  EXPECT_TRUE(bitwise_equal(y.value(), x));
}

TEST(Module, TrainableSwitchControlsGradients) {
  nn::Rng rng(5);
  nn::Conv2d conv(2, 2, 3, 1, rng);
  const Var x(testing::random_tensor(Shape{1, 2, 4, 4}, 6));
  conv.set_trainable(false);
  Var loss = ops::sum(conv(x));
  ag::backward(loss);
  for (const auto& p : conv.parameters()) EXPECT_TRUE(p.var.grad().empty());
  conv.set_trainable(true);
  loss = ops::sum(conv(x));
  ag::backward(loss);
  for (const auto& p : conv.parameters()) EXPECT_GT(p.var.grad().max_abs(), 0.0f);
}

TEST(Module, ParametersAreFiniteAndNamed) {
  const CodecModel model(testing::tiny_config(), 3);
  std::set<std::string> names;
  for (const auto& p : model.parameters()) {
    EXPECT_TRUE(p.var.value().all_finite()) << p.name;
    EXPECT_TRUE(names.insert(p.name).second) << "duplicate " << p.name;
  }
  EXPECT_GT(names.size(), 20u);
}

TEST(Module, CloneIsIndependent) {
  CodecModel model(testing::tiny_config(), 3);
  auto copy = model.clone();
  const auto a = model.parameters(), b = copy->parameters();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_TRUE(bitwise_equal(a[i].var.value(), b[i].var.value()));
  b[0].var.node()->value[0] += 1.0f;
  EXPECT_FALSE(bitwise_equal(a[0].var.value(), b[0].var.value()));
}

}  // namespace
}  // namespace bgop
