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

#include <numeric>
#include <set>

#include "../mlp_oracle.hpp"
#include "../test_util.hpp"
#include "gadget/label/model_io.hpp"
#include "gadget/label/train.hpp"

using namespace gadget;
using namespace gadget::label;

namespace {

const std::vector<std::string> kBinary{"ok", "defect"};

struct Toy {
  Matrix x;
  std::vector<int> y;
};

// Two clusters split by x0 + x1 = 1 with a margin of at least 0.2.
Toy separable(Rng& r, int per_class) {
  Toy t{Matrix(2 * per_class, 2), {}};
  for (int i = 0; i < 2 * per_class; ++i) {
    const int c = i % 2;
    double a, b;
    do {
      a = r.uniform();
      b = r.uniform();
    } while (c == 1 ? a + b < 1.2 : a + b > 0.8);
    t.x(i, 0) = a;
    t.x(i, 1) = b;
    t.y.push_back(c);
  }
  return t;
}

std::vector<std::vector<double>> rows(const Matrix& m) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i].push_back(m(i, j));
  return out;
}

std::vector<FeatureVector> to_features(const Matrix& m) {
  std::vector<FeatureVector> out;
  const auto r = rows(m);
  for (std::size_t i = 0; i < r.size(); ++i) out.push_back({"img" + std::to_string(i), r[i]});
  return out;
}

TrainConfig fast_config(std::uint64_t seed) {
  TrainConfig c;
  c.seed = seed;
  c.max_iterations = 200;
  return c;
}

}  // namespace

TEST(Grid, WidthSetDefinition) {
  EXPECT_EQ(width_grid(100), (std::vector<int>{2, 4, 8, 16, 32, 64, 128}));
  EXPECT_EQ(width_grid(1), (std::vector<int>{2}));
  EXPECT_EQ(width_grid(2), (std::vector<int>{2}));
  EXPECT_EQ(width_grid(3), (std::vector<int>{2, 4}));
  EXPECT_EQ(width_grid(128).back(), 128);
  EXPECT_EQ(width_grid(129).back(), 256);
  // Every width set satisfies 2^(m-1) <= I <= 2^m for its m.
  for (int inputs = 1; inputs <= 600; ++inputs) {
    const int top = width_grid(inputs).back();
    EXPECT_LE(top / 2, inputs);
    EXPECT_GE(top, inputs);
  }
}

TEST(Grid, HundredInputsGiveTwentyOneArchitectures) {
  const auto g = architecture_grid(100, 2);
  ASSERT_EQ(g.size(), 21u);
  std::set<std::pair<std::size_t, int>> seen;
  for (const auto& a : g) {
    EXPECT_EQ(a.inputs, 100);
    EXPECT_EQ(a.outputs, 2);
    for (int w : a.hidden) EXPECT_EQ(w, a.hidden.front());
    seen.insert({a.hidden.size(), a.hidden.front()});
  }
  EXPECT_EQ(seen.size(), 21u);
  EXPECT_EQ(g.front().name(), "1x2");
  EXPECT_EQ(g.back().name(), "3x128");
}

TEST(Mlp, ParameterCount) {
  const MlpArchitecture a{5, {8, 4}, 3};
  EXPECT_EQ(a.parameter_count(), 8u * 6 + 4 * 9 + 3 * 5);
  EXPECT_THROW((MlpArchitecture{0, {}, 2}.validate()), InvalidArgument);
  EXPECT_THROW((MlpArchitecture{3, {}, 1}.validate()), InvalidArgument);
}

TEST(Mlp, LossMatchesScalarOracle) {
  Rng r(1);
  for (int seed = 0; seed < 5; ++seed) {
    const MlpArchitecture a{4, std::vector<int>(1 + seed % 3, 6), 3};
    const auto theta = glorot_init(a, r);
    Matrix x = Matrix::Random(9, 4);
    std::vector<int> y;
    for (int i = 0; i < 9; ++i) y.push_back(static_cast<int>(r.index(3)));
    const double got = mlp_loss_grad(a, theta, x, y, 0.3, {});
    const double want = fixture::oracle_mlp_loss(a.sizes(), theta, rows(x), y, 0.3);
    EXPECT_NEAR(got, want, 1e-12 * std::abs(want));
  }
}

// Analytic gradient vs central differences of the scalar oracle.
TEST(Mlp, GradientMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng r(100 + seed);
    const int layers = 1 + static_cast<int>(seed % 3);
    const MlpArchitecture a{3 + static_cast<int>(r.index(5)), std::vector<int>(layers, 2 + static_cast<int>(r.index(7))),
                            2 + static_cast<int>(r.index(2))};
    auto theta = glorot_init(a, r);
    for (double& t : theta) t += r.normal(0.0, 0.1);  // non-zero biases
    Matrix x(7, a.inputs);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = r.normal();
    std::vector<int> y;
    for (int i = 0; i < 7; ++i) y.push_back(static_cast<int>(r.index(a.outputs)));
    std::vector<double> g(theta.size());
    mlp_loss_grad(a, theta, x, y, 0.01, g);
    const auto xr = rows(x);
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double h = 1e-6;
      auto tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const double fd = (fixture::oracle_mlp_loss(a.sizes(), tp, xr, y, 0.01) -
                         fixture::oracle_mlp_loss(a.sizes(), tm, xr, y, 0.01)) / (2 * h);
      num += (fd - g[k]) * (fd - g[k]);
      den += std::max(fd * fd, g[k] * g[k]);
    }
    EXPECT_LT(std::sqrt(num / den), 1e-5) << "seed " << seed << " arch " << a.name();
  }
}

TEST(Predict, ZeroWeightsGiveUniformProbabilities) {
  MlpModel m;
  m.arch = {3, {4}, 2};
  m.classes = kBinary;
  m.standardizer = {{0, 0, 0}, {1, 1, 1}};
  m.theta.assign(m.arch.parameter_count(), 0.0);
  const std::vector<FeatureVector> f{{"a", {0.2, 0.9, 0.4}}};
  const auto w = predict(m, f);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].probabilities, (std::vector<double>{0.5, 0.5}));
  EXPECT_EQ(w[0].predicted_index, 0u);
  EXPECT_EQ(w[0].predicted_class, "ok");
}

TEST(Predict, ProbabilitiesSumToOneAndBatchOrderIrrelevant) {
  Rng r(2);
  MlpModel m;
  m.arch = {4, {8, 8}, 3};
  m.classes = {"a", "b", "c"};
  m.standardizer = {{0.1, 0.2, 0.3, 0.4}, {1, 2, 0.5, 1}};
  m.theta = glorot_init(m.arch, r);
  std::vector<FeatureVector> f;
  for (int i = 0; i < 30; ++i) {
    f.push_back({"i" + std::to_string(i), {r.uniform(), r.uniform(), r.uniform(), r.uniform()}});
  }
  const auto w = predict(m, f);
  for (const auto& l : w) {
    EXPECT_NEAR(std::accumulate(l.probabilities.begin(), l.probabilities.end(), 0.0), 1.0, 1e-6);
  }
  auto rev = f;
  std::reverse(rev.begin(), rev.end());
  const auto wr = predict(m, rev);
  for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(w[i], wr[f.size() - 1 - i]);
  const auto single = predict(m, std::span<const FeatureVector>(&f[7], 1));
  EXPECT_EQ(single[0], w[7]);
}

TEST(Predict, FeatureLengthMismatchNamesBothCounts) {
  MlpModel m;
  m.arch = {3, {2}, 2};
  m.classes = kBinary;
  m.standardizer = {{0, 0, 0}, {1, 1, 1}};
  m.theta.assign(m.arch.parameter_count(), 0.0);
  const std::vector<FeatureVector> f{{"a", {0.2, 0.9}}};
  try {
    (void)predict(m, f);
    FAIL();
  } catch (const InvalidArgument& e) {
    EXPECT_NE(std::string(e.what()).find("expected 3, got 2"), std::string::npos);
  }
}

TEST(Folds, HundredPerClassGivesFiveFoldsOfTwenty) {
  std::vector<int> y;
  for (int i = 0; i < 200; ++i) y.push_back(i % 2);
  Rng r(3);
  const auto folds = make_folds(y, kBinary, r);
  ASSERT_EQ(folds.size(), 5u);
  std::vector<int> owner(y.size(), -1);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    int per[2] = {0, 0};
    for (std::size_t i : folds[f].validation) {
      EXPECT_EQ(owner[i], -1);
      owner[i] = static_cast<int>(f);
      ++per[y[i]];
    }
    EXPECT_EQ(per[0], 20);
    EXPECT_EQ(per[1], 20);
    // train = complement of validation
    std::set<std::size_t> all(folds[f].train.begin(), folds[f].train.end());
    all.insert(folds[f].validation.begin(), folds[f].validation.end());
    EXPECT_EQ(all.size(), y.size());
    EXPECT_EQ(folds[f].train.size() + folds[f].validation.size(), y.size());
  }
  for (int o : owner) EXPECT_GE(o, 0);
}

TEST(Folds, TooFewExamplesReportsClassAndCounts) {
  std::vector<int> y;
  for (int i = 0; i < 100; ++i) y.push_back(0);
  for (int i = 0; i < 25; ++i) y.push_back(1);
  Rng r(4);
  try {
    (void)make_folds(y, kBinary, r);
    FAIL();
  } catch (const TooFewExamples& e) {
    EXPECT_EQ(e.class_name(), "defect");
    EXPECT_EQ(e.have(), 25u);
    EXPECT_EQ(e.need(), 40u);
  }
}

TEST(Folds, KLimitedByRarestClass) {
  std::vector<int> y;
  for (int i = 0; i < 300; ++i) y.push_back(0);
  for (int i = 0; i < 65; ++i) y.push_back(1);
  Rng r(5);
  EXPECT_EQ(make_folds(y, kBinary, r).size(), 3u);
}

TEST(Lbfgs, MinimizesRosenbrock) {
  auto fg = [](const Vector& x, Vector& g) {
    const double a = 1 - x[0], b = x[1] - x[0] * x[0];
    g.resize(2);
    g[0] = -2 * a - 400 * x[0] * b;
    g[1] = 200 * b;
    return a * a + 100 * b * b;
  };
  Lbfgs opt;
  opt.start(fg, Vector::Constant(2, -1.2));
  for (int i = 0; i < 500; ++i) {
    if (opt.step(fg) != LbfgsStatus::Progress) break;
  }
  EXPECT_NEAR(opt.x()[0], 1.0, 1e-6);
  EXPECT_NEAR(opt.x()[1], 1.0, 1e-6);
}

TEST(Lbfgs, StepsSatisfySufficientDecrease) {
  Rng r(6);
  Matrix q = Matrix::Random(6, 6);
  const Matrix a = q.transpose() * q + Matrix::Identity(6, 6);
  const Vector b = Vector::Random(6);
  auto fg = [&](const Vector& x, Vector& g) {
    g = a * x - b;
    return 0.5 * x.dot(a * x) - b.dot(x);
  };
  Lbfgs opt;
  opt.start(fg, Vector::Zero(6));
  double prev = opt.value();
  for (int i = 0; i < 50 && opt.step(fg) == LbfgsStatus::Progress; ++i) {
    EXPECT_LT(opt.value(), prev);
    prev = opt.value();
  }
  EXPECT_LT((a * opt.x() - b).norm(), 1e-6);
}

TEST(Train, SeparableToyReachesPerfectF1) {
  Rng r(7);
  const Toy t = separable(r, 60);
  Rng fr(8);
  const auto folds = make_folds(t.y, kBinary, fr);
  const auto res = train_mlp({2, {8}, 2}, t.x, t.y, kBinary, folds, fast_config(1));
  EXPECT_EQ(res.cv_f1, 1.0);
  const auto w = predict(res.model, to_features(t.x));
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(static_cast<int>(w[i].predicted_index), t.y[i]);
}

TEST(Train, ShuffledLabelsAreNearChance) {
  double sum = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    Rng r(50 + seed);
    const Toy t = separable(r, 50);
    std::vector<int> y = t.y;
    r.shuffle(std::span<int>(y));
    const auto folds = make_folds(y, kBinary, r);
    sum += train_mlp({2, {8}, 2}, t.x, y, kBinary, folds, fast_config(seed)).cv_f1;
  }
  EXPECT_NEAR(sum / 10.0, 0.5, 0.15);
}

TEST(Train, SameSeedSameResult) {
  Rng r(9);
  const Toy t = separable(r, 50);
  Rng f1(10), f2(10);
  const auto a = train_mlp({2, {4, 4}, 2}, t.x, t.y, kBinary, make_folds(t.y, kBinary, f1), fast_config(3));
  const auto b = train_mlp({2, {4, 4}, 2}, t.x, t.y, kBinary, make_folds(t.y, kBinary, f2), fast_config(3));
  EXPECT_EQ(a.cv_f1, b.cv_f1);
  EXPECT_EQ(a.model, b.model);
}

TEST(Train, PositiveScalingLeavesPredictionsUnchanged) {
  Rng r(11);
  const Toy t = separable(r, 50);
  const Matrix scaled = t.x * 3.7;
  Rng f1(12), f2(12);
  const auto a = train_mlp({2, {8}, 2}, t.x, t.y, kBinary, make_folds(t.y, kBinary, f1), fast_config(4));
  const auto b = train_mlp({2, {8}, 2}, scaled, t.y, kBinary, make_folds(t.y, kBinary, f2), fast_config(4));
  const auto pa = predict(a.model, to_features(t.x));
  const auto pb = predict(b.model, to_features(scaled));
  for (std::size_t i = 0; i < pa.size(); ++i) EXPECT_EQ(pa[i].predicted_index, pb[i].predicted_index);
}

TEST(Tune, SingleArchitectureGridReturnsIt) {
  Rng r(13);
  const Toy t = separable(r, 50);
  TuneOptions o;
  o.grid = std::vector<MlpArchitecture>{{2, {4}, 2}};
  const auto res = tune(t.x, t.y, kBinary, fast_config(5), {}, o);
  EXPECT_EQ(res.best, (MlpArchitecture{2, {4}, 2}));
  ASSERT_EQ(res.scores.size(), 1u);
}

TEST(Tune, SelectsArgmaxAndIsReproducible) {
  Rng r(14);
  const Toy t = separable(r, 50);
  auto cfg = fast_config(6);
  const auto a = tune(t.x, t.y, kBinary, cfg);
  cfg.jobs = 3;
  const auto b = tune(t.x, t.y, kBinary, cfg);
  EXPECT_EQ(a.best, b.best);
  EXPECT_EQ(a.model, b.model);
  ASSERT_EQ(a.scores.size(), 3u);  // I = 2: widths {2}
  for (const auto& s : a.scores) EXPECT_GE(a.cv_f1, s.cv_f1);
  // First maximal entry wins.
  for (const auto& s : a.scores) {
    if (s.arch == a.best) break;
    EXPECT_LT(s.cv_f1, a.cv_f1);
  }
}

TEST(ModelIo, JsonRoundTripIsExact) {
  Rng r(15);
  MlpModel m;
  m.arch = {3, {4, 4}, 2};
  m.classes = kBinary;
  m.feature_names = {"p_a", "p_b", "p_c"};
  m.standardizer = {{0.1, 0.25, 1.0 / 3.0}, {1.5, 0.2, 1.0}};
  m.theta = glorot_init(m.arch, r);
  m.iterations = 17;
  fixture::TempDir dir;
  save_model(m, dir.path() / "model.json");
  EXPECT_EQ(load_model(dir.path() / "model.json"), m);
}

TEST(ModelIo, RejectsInconsistentModel) {
  json j = model_to_json(MlpModel{{2, {2}, 2}, kBinary, {}, {{0, 0}, {1, 1}}, std::vector<double>(12, 0.0), 0});
  j["classes"] = {"only"};
  EXPECT_THROW((void)model_from_json(j), InvalidArgument);
}
