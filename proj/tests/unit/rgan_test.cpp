// Copyright 2026 The Gadget Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <Eigen/SVD>

#include <cmath>

#include "../test_util.hpp"
#include "gadget/augment/rgan.hpp"

using namespace gadget;
using namespace gadget::augment;

namespace {

std::vector<Pattern> toy_patterns(Rng& rng, int n, int w, int h) {
  std::vector<Pattern> out;
  for (int i = 0; i < n; ++i) {
    Pattern p;
    p.id = "t" + std::to_string(i);
    p.pixels = fixture::smooth_random_image(rng, w, h);
    p.original_size = p.pixels.size();
    p.defect_class = "defect";
    out.push_back(std::move(p));
  }
  return out;
}

double top_singular(const GanMatrix& m) { return Eigen::JacobiSVD<GanMatrix>(m).singularValues()(0); }

GanConfig small_config() {
  GanConfig c;
  c.noise_dim = 100;
  c.hidden = 32;
  c.epochs = 20;
  return c;
}

/// Max over sampled coordinates of |analytic - numeric| / max(|numeric|, floor).
template <typename Loss>
double fd_error(GanVector& theta, const GanVector& analytic, Loss loss, Rng& rng, int samples) {
  double worst = 0.0;
  const double h = 1e-6;
  for (int s = 0; s < samples; ++s) {
    const auto i = static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(theta.size())));
    const double keep = theta(i);
    theta(i) = keep + h;
    const double up = loss();
    theta(i) = keep - h;
    const double down = loss();
    theta(i) = keep;
    const double numeric = (up - down) / (2 * h);
    worst = std::max(worst, std::abs(analytic(i) - numeric) / std::max(std::abs(numeric), 1e-4));
  }
  return worst;
}

}  // namespace

TEST(Rgan, SymmetricOutputsGiveLogHalf) {
  const std::vector<double> c{0.3, -1.2, 4.0};
  const auto l = relativistic_losses(c, c);
  EXPECT_NEAR(l.d_loss, -std::log(0.5), 1e-15);
  EXPECT_NEAR(l.g_loss, -std::log(0.5), 1e-15);
  EXPECT_THROW(relativistic_losses(c, std::vector<double>{1.0}), InvalidArgument);
}

TEST(Rgan, LossesAreMirrorImages) {
  const std::vector<double> r{2.0, 0.5}, f{-1.0, 0.25};
  const auto a = relativistic_losses(r, f), b = relativistic_losses(f, r);
  EXPECT_NEAR(a.d_loss, b.g_loss, 1e-15);
  EXPECT_NEAR(a.g_loss, b.d_loss, 1e-15);
  // Oracle: mean of -log(1 / (1 + exp(-(r - f)))).
  const double oracle = (std::log1p(std::exp(-3.0)) + std::log1p(std::exp(-0.25))) / 2;
  EXPECT_NEAR(a.d_loss, oracle, 1e-15);
  EXPECT_TRUE(std::isfinite(relativistic_losses(std::vector<double>{800.0}, std::vector<double>{-800.0}).g_loss));
}

TEST(Rgan, PowerIterationMatchesSvd) {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    const int r = 1 + static_cast<int>(rng.index(12)), c = 1 + static_cast<int>(rng.index(12));
    GanMatrix m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
    SpectralState s;
    power_iterate(m, s, rng);
    EXPECT_NEAR(s.sigma, top_singular(m), 1e-6 * top_singular(m)) << r << "x" << c;
    EXPECT_NEAR(top_singular(m / s.sigma), 1.0, 1e-6);
  }
}

TEST(Rgan, SquareSizeRule) {
  Rng rng(2);
  auto ps = toy_patterns(rng, 2, 10, 20);
  ps[1].pixels = GrayImage::filled(30, 40, 0.5);
  EXPECT_EQ(gan_square_size(ps), 25);
  ps[0].pixels = GrayImage::filled(300, 300, 0.5);
  EXPECT_EQ(gan_square_size(ps), 100);
}

TEST(Rgan, NormalizedCriticWeightsHaveUnitSpectralNorm) {
  Rng rng(3);
  const auto ps = toy_patterns(rng, 4, 9, 7);
  GanConfig cfg = small_config();
  cfg.hidden = 64;
  const auto r = train_rgan(ps, cfg, rng);
  EXPECT_NEAR(top_singular(r.discriminator.normalized_W1()), 1.0, 1e-3);
  EXPECT_NEAR(top_singular(r.discriminator.normalized_W2()), 1.0, 1e-3);
}

TEST(Rgan, GeneratorGradientMatchesFiniteDifferences) {
  Rng rng(4);
  const auto ps = toy_patterns(rng, 4, 6, 6);
  auto r = train_rgan(ps, small_config(), rng);
  const GanMatrix real = square_columns(ps, r.generator.side);
  const GanMatrix z = noise_matrix(r.generator.noise_dim(), real.cols(), rng);
  const auto lg = generator_loss_grad(r.generator, r.discriminator, real, z);
  auto loss = [&] { return generator_loss_grad(r.generator, r.discriminator, real, z).loss; };
  EXPECT_LT(fd_error(r.generator.net.theta, lg.grad, loss, rng, 200), 1e-4);
}

TEST(Rgan, CriticGradientThroughSpectralNormMatchesFiniteDifferences) {
  Rng rng(5);
  const auto ps = toy_patterns(rng, 4, 5, 5);
  auto r = train_rgan(ps, small_config(), rng);
  Discriminator& d = r.discriminator;
  const GanMatrix real = square_columns(ps, r.generator.side);
  const GanMatrix fake = r.generator.forward(noise_matrix(r.generator.noise_dim(), real.cols(), rng));
  d.normalize();
  const auto ld = discriminator_loss_grad(d, real, fake);
  auto loss = [&] {
    d.normalize();
    return discriminator_loss_grad(d, real, fake).loss;
  };
  EXPECT_LT(fd_error(d.net.theta, ld.grad, loss, rng, 200), 1e-4);
}

TEST(Rgan, CriticLossDecreasesEarlyOnTwoPatterns) {
  int decreased = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(100 + seed);
    const auto ps = toy_patterns(rng, 2, 12, 10);
    GanConfig cfg;
    cfg.epochs = 50;
    const auto r = train_rgan(ps, cfg, rng);
    ASSERT_EQ(r.d_loss.size(), 50u);
    // Per-epoch losses use two fresh noise pairs, so compare 5-epoch means.
    double first = 0, last = 0;
    for (int k = 0; k < 5; ++k) {
      first += r.d_loss[k];
      last += r.d_loss[45 + k];
    }
    if (last < first) ++decreased;
  }
  EXPECT_GE(decreased, 8);
}

TEST(Rgan, RequiresTwoPatterns) {
  Rng rng(6);
  const auto ps = toy_patterns(rng, 1, 5, 5);
  EXPECT_THROW(train_rgan(ps, small_config(), rng), InvalidArgument);
}

TEST(Rgan, NonFiniteLossReportsEpoch) {
  Rng rng(7);
  const auto ps = toy_patterns(rng, 3, 5, 5);
  GanConfig cfg = small_config();
  cfg.optimizer = GanOptimizer::Sgd;
  cfg.spectral_norm = false;
  cfg.lr_d = cfg.lr_g = 1e300;
  try {
    train_rgan(ps, cfg, rng);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("epoch"), std::string::npos);
  }
}

TEST(Rgan, GeneratorOutputsAreIntensities) {
  Rng rng(8);
  const auto ps = toy_patterns(rng, 3, 8, 6);
  const auto r = train_rgan(ps, small_config(), rng);
  EXPECT_EQ(r.generator.side, 7);
  const GanMatrix x = r.generator.forward(noise_matrix(100, 5, rng));
  EXPECT_EQ(x.rows(), 49);
  EXPECT_GE(x.minCoeff(), 0.0);
  EXPECT_LE(x.maxCoeff(), 1.0);
}

TEST(GanPatterns, CountZeroIsEmpty) {
  Rng rng(9);
  const auto r = train_rgan(toy_patterns(rng, 2, 6, 6), small_config(), rng);
  const std::vector<Size> sizes{{4, 4}};
  EXPECT_TRUE(generate_gan_patterns(r.generator, 0, sizes, rng).empty());
  EXPECT_THROW(generate_gan_patterns(r.generator, 1, std::vector<Size>{}, rng), InvalidArgument);
}

TEST(GanPatterns, SingleSizeDraw) {
  Rng rng(10);
  const auto r = train_rgan(toy_patterns(rng, 2, 6, 6), small_config(), rng);
  const std::vector<Size> sizes{{40, 20}};
  const auto out = generate_gan_patterns(r.generator, 25, sizes, rng, "bubble");
  ASSERT_EQ(out.size(), 25u);
  for (const auto& p : out) {
    EXPECT_EQ(p.pixels.size(), (Size{40, 20}));
    EXPECT_EQ(p.provenance, Provenance::GanAug);
    EXPECT_EQ(p.defect_class, "bubble");
  }
}

TEST(GanPatterns, SizesDrawnFromOriginals) {
  Rng rng(11);
  const auto r = train_rgan(toy_patterns(rng, 2, 6, 6), small_config(), rng);
  const std::vector<Size> sizes{{4, 9}, {12, 3}};
  std::set<Size> seen;
  for (const auto& p : generate_gan_patterns(r.generator, 40, sizes, rng)) {
    seen.insert(p.pixels.size());
  }
  EXPECT_EQ(seen, (std::set<Size>{{4, 9}, {12, 3}}));
}

TEST(GanPatterns, DeterministicForSeed) {
  auto run = [] {
    Rng rng(12);
    const auto r = train_rgan(toy_patterns(rng, 3, 6, 6), small_config(), rng);
    const std::vector<Size> sizes{{5, 5}, {7, 6}};
    return generate_gan_patterns(r.generator, 100, sizes, rng);
  };
  EXPECT_EQ(run(), run());
}
