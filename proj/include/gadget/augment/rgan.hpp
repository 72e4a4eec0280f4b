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

#ifndef GADGET_AUGMENT_RGAN_HPP
#define GADGET_AUGMENT_RGAN_HPP

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gadget/core/resample.hpp"
#include "gadget/core/rng.hpp"
#include "gadget/core/types.hpp"

namespace gadget::augment {

using GanMatrix = Eigen::MatrixXd;
using GanVector = Eigen::VectorXd;

enum class GanOptimizer { Sgd, Adam };

inline std::string_view to_string(GanOptimizer o) { return o == GanOptimizer::Sgd ? "sgd" : "adam"; }

inline GanOptimizer parse_gan_optimizer(std::string_view s) {
  if (s == "sgd") return GanOptimizer::Sgd;
  if (s == "adam") return GanOptimizer::Adam;
  throw InvalidArgument("gan optimizer must be 'sgd' or 'adam', got '" + std::string(s) + "'");
}

struct GanConfig {
  int noise_dim = 100;
  int hidden = 256;
  double lr_g = 1e-4;
  double lr_d = 1e-4;
  int epochs = 1000;
  /// Side of the square training raster; 0 derives it from the patterns.
  int square_size = 0;
  bool spectral_norm = true;
  GanOptimizer optimizer = GanOptimizer::Adam;
  double beta1 = 0.5;
  double beta2 = 0.999;
  double leak = 0.2;
  /// Warm-started power iterations per training step; the final
  /// normalization runs to convergence.
  int power_iterations = 5;

  void validate() const {
    if (power_iterations < 1) throw InvalidArgument("gan: power_iterations must be >= 1");
    if (noise_dim < 1) throw InvalidArgument("gan: noise_dim must be >= 1");
    if (hidden < 1) throw InvalidArgument("gan: hidden must be >= 1");
    if (!(lr_g > 0) || !(lr_d > 0)) throw InvalidArgument("gan: learning rates must be > 0");
    if (epochs < 0) throw InvalidArgument("gan: epochs must be >= 0");
    if (square_size < 0) throw InvalidArgument("gan: square_size must be >= 1 (or 0 for auto)");
  }
};

/// min(100, round(mean of all widths and heights)), at least 1.
inline int gan_square_size(std::span<const Pattern> patterns) {
  if (patterns.empty()) throw InvalidArgument("gan: no patterns");
  double sum = 0.0;
  for (const auto& p : patterns) sum += p.width() + p.height();
  const long side = std::lround(sum / (2.0 * static_cast<double>(patterns.size())));
  return static_cast<int>(std::clamp(side, 1L, 100L));
}

/**
 * Two dense layers packed in one parameter vector: W1 (hidden x in,
 * column-major), b1, W2 (out x hidden), b2.
 */
struct TwoLayer {
  int in = 0;
  int hidden = 0;
  int out = 0;
  GanVector theta;

  TwoLayer() = default;
  TwoLayer(int in_, int hidden_, int out_) : in(in_), hidden(hidden_), out(out_) {
    theta = GanVector::Zero(static_cast<Eigen::Index>(size()));
  }

  std::size_t size() const {
    return static_cast<std::size_t>(hidden) * (in + 1) + static_cast<std::size_t>(out) * (hidden + 1);
  }

  Eigen::Map<GanMatrix> W1() { return {theta.data(), hidden, in}; }
  Eigen::Map<GanVector> b1() { return {theta.data() + off_b1(), hidden}; }
  Eigen::Map<GanMatrix> W2() { return {theta.data() + off_W2(), out, hidden}; }
  Eigen::Map<GanVector> b2() { return {theta.data() + off_b2(), out}; }
  Eigen::Map<const GanMatrix> W1() const { return {theta.data(), hidden, in}; }
  Eigen::Map<const GanVector> b1() const { return {theta.data() + off_b1(), hidden}; }
  Eigen::Map<const GanMatrix> W2() const { return {theta.data() + off_W2(), out, hidden}; }
  Eigen::Map<const GanVector> b2() const { return {theta.data() + off_b2(), out}; }

  /// Glorot-uniform weights, zero biases.
  void init(Rng& rng) {
    theta.setZero();
    auto fill = [&](Eigen::Map<GanMatrix> w, int fan_in, int fan_out) {
      const double a = std::sqrt(6.0 / (fan_in + fan_out));
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        for (Eigen::Index i = 0; i < w.rows(); ++i) w(i, j) = rng.uniform(-a, a);
      }
    };
    fill(W1(), in, hidden);
    fill(W2(), hidden, out);
  }

 private:
  Eigen::Index off_b1() const { return static_cast<Eigen::Index>(hidden) * in; }
  Eigen::Index off_W2() const { return off_b1() + hidden; }
  Eigen::Index off_b2() const { return off_W2() + static_cast<Eigen::Index>(out) * hidden; }
};

/// Spectral normalization state for one weight matrix: persistent left
/// singular vector estimate u, the matching v and sigma.
struct SpectralState {
  GanVector u;
  GanVector v;
  double sigma = 1.0;
};

/**
 * Power iteration warm-started from state.u, run until u moves by less than
 * `tolerance` (max norm) or `max_iterations`. Stopping on the vectors rather
 * than sigma matters: sigma converges quadratically faster, and the
 * gradient through W / sigma uses u and v.
 */
inline void power_iterate(const Eigen::Ref<const GanMatrix>& w, SpectralState& s, Rng& rng,
                          double tolerance = 1e-12, int max_iterations = 5000) {
  if (s.u.size() != w.rows()) {
    s.u.resize(w.rows());
    for (Eigen::Index i = 0; i < s.u.size(); ++i) s.u(i) = rng.normal();
    s.u.normalize();
  }
  for (int it = 0; it < max_iterations; ++it) {
    s.v = w.transpose() * s.u;
    const double vn = s.v.norm();
    if (vn == 0.0) throw NumericError("spectral norm: weight matrix is zero");
    s.v /= vn;
    GanVector u = w * s.v;
    s.sigma = u.norm();
    u /= s.sigma;
    const double moved = (u - s.u).cwiseAbs().maxCoeff();
    s.u = std::move(u);
    if (moved <= tolerance) break;
  }
}

/// -log(sigmoid(x)) without overflow.
inline double softplus_neg(double x) { return x > 0 ? std::log1p(std::exp(-x)) : -x + std::log1p(std::exp(x)); }
inline double sigmoid(double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

/// Relativistic losses for paired critic outputs; both are means over pairs.
struct RelativisticLoss {
  double d_loss = 0.0;
  double g_loss = 0.0;
};

inline RelativisticLoss relativistic_losses(std::span<const double> c_real, std::span<const double> c_fake) {
  if (c_real.size() != c_fake.size() || c_real.empty()) {
    throw InvalidArgument("relativistic loss: need equally many real and fake outputs");
  }
  RelativisticLoss l;
  for (std::size_t i = 0; i < c_real.size(); ++i) {
    const double d = c_real[i] - c_fake[i];
    l.d_loss += softplus_neg(d);
    l.g_loss += softplus_neg(-d);
  }
  l.d_loss /= static_cast<double>(c_real.size());
  l.g_loss /= static_cast<double>(c_real.size());
  return l;
}

/// Noise vector -> square raster, outputs (tanh + 1) / 2.
struct Generator {
  int side = 0;
  TwoLayer net;

  int noise_dim() const noexcept { return net.in; }

  struct Cache {
    GanMatrix h;
    GanMatrix t;  // tanh of the output pre-activation
  };

  /// Z is noise_dim x n; returns side^2 x n in [0, 1].
  GanMatrix forward(const GanMatrix& z, Cache* cache = nullptr) const {
    GanMatrix h = ((net.W1() * z).colwise() + net.b1()).cwiseMax(0.0);
    GanMatrix t = ((net.W2() * h).colwise() + net.b2()).array().tanh().matrix();
    GanMatrix x = ((t.array() + 1.0) * 0.5).matrix();
    if (cache) *cache = {std::move(h), std::move(t)};
    return x;
  }

  /// Gradient w.r.t. theta given dL/dX.
  GanVector backward(const GanMatrix& z, const Cache& c, const GanMatrix& dx) const {
    TwoLayer g(net.in, net.hidden, net.out);
    const GanMatrix dout = (dx.array() * 0.5 * (1.0 - c.t.array().square())).matrix();
    g.W2() = dout * c.h.transpose();
    g.b2() = dout.rowwise().sum();
    const GanMatrix dh = ((net.W2().transpose() * dout).array() * (c.h.array() > 0.0).cast<double>()).matrix();
    g.W1() = dh * z.transpose();
    g.b1() = dh.rowwise().sum();
    return std::move(g.theta);
  }
};

/// Critic on flattened rasters: dense -> LeakyReLU -> dense scalar, with
/// both weight matrices divided by their spectral norm.
struct Discriminator {
  TwoLayer net;
  double leak = 0.2;
  bool spectral_norm = true;
  SpectralState sn1, sn2;
  Rng sn_rng{0};
  double sn_tolerance = 1e-9;
  int sn_max_iterations = 5000;

  /// Re-estimates both spectral norms from the current raw weights.
  void normalize() {
    if (!spectral_norm) return;
    power_iterate(net.W1(), sn1, sn_rng, sn_tolerance, sn_max_iterations);
    power_iterate(net.W2(), sn2, sn_rng, sn_tolerance, sn_max_iterations);
  }

  double sigma1() const { return spectral_norm ? sn1.sigma : 1.0; }
  double sigma2() const { return spectral_norm ? sn2.sigma : 1.0; }
  GanMatrix normalized_W1() const { return net.W1() / sigma1(); }
  GanMatrix normalized_W2() const { return net.W2() / sigma2(); }

  struct Cache {
    GanMatrix a;
    GanMatrix l;
  };

  /// X is in x n; returns a 1 x n row of critic outputs.
  GanMatrix forward(const GanMatrix& x, Cache* cache = nullptr) const {
    GanMatrix a = (normalized_W1() * x).colwise() + net.b1();
    GanMatrix l = a.unaryExpr([&](double v) { return v > 0 ? v : leak * v; });
    GanMatrix c = (normalized_W2() * l).colwise() + net.b2();
    if (cache) *cache = {std::move(a), std::move(l)};
    return c;
  }

  /// Chain rule through W / sigma(W) for a gradient w.r.t. the normalized matrix.
  static GanMatrix through_norm(const GanMatrix& g_bar, const GanMatrix& w_bar, const SpectralState& s) {
    const double inner = (g_bar.array() * w_bar.array()).sum();
    return (g_bar - inner * s.u * s.v.transpose()) / s.sigma;
  }

  /// Gradients w.r.t. raw theta and w.r.t. the input, given dL/dC (1 x n).
  std::pair<GanVector, GanMatrix> backward(const GanMatrix& x, const Cache& c, const GanMatrix& dc) const {
    TwoLayer g(net.in, net.hidden, net.out);
    const GanMatrix w1 = normalized_W1(), w2 = normalized_W2();
    GanMatrix gw2 = dc * c.l.transpose();
    g.b2() = dc.rowwise().sum();
    const GanMatrix da =
        ((w2.transpose() * dc).array() * c.a.array().unaryExpr([&](double v) { return v > 0 ? 1.0 : leak; }))
            .matrix();
    GanMatrix gw1 = da * x.transpose();
    g.b1() = da.rowwise().sum();
    if (spectral_norm) {
      gw1 = through_norm(gw1, w1, sn1);
      gw2 = through_norm(gw2, w2, sn2);
    }
    g.W1() = gw1;
    g.W2() = gw2;
    return {std::move(g.theta), w1.transpose() * da};
  }
};

inline std::vector<double> row_values(const GanMatrix& m) { return {m.data(), m.data() + m.size()}; }

struct LossGrad {
  double loss = 0.0;
  GanVector grad;
};

/// Critic loss on paired real / fake columns; gradient w.r.t. the raw
/// critic parameters. Call d.normalize() first.
inline LossGrad discriminator_loss_grad(const Discriminator& d, const GanMatrix& real, const GanMatrix& fake) {
  Discriminator::Cache cr, cf;
  const GanMatrix c_real = d.forward(real, &cr), c_fake = d.forward(fake, &cf);
  const auto n = static_cast<double>(real.cols());
  const auto l = relativistic_losses(row_values(c_real), row_values(c_fake));
  GanMatrix dr(1, real.cols()), df(1, real.cols());
  for (Eigen::Index i = 0; i < real.cols(); ++i) {
    const double s = sigmoid(-(c_real(0, i) - c_fake(0, i))) / n;
    dr(0, i) = -s;
    df(0, i) = s;
  }
  GanVector g = d.backward(real, cr, dr).first + d.backward(fake, cf, df).first;
  return {l.d_loss, std::move(g)};
}

/// Generator loss for noise columns Z against paired real columns; gradient
/// w.r.t. the generator parameters with the critic fixed.
inline LossGrad generator_loss_grad(const Generator& g, const Discriminator& d, const GanMatrix& real,
                                    const GanMatrix& z) {
  Generator::Cache gc;
  const GanMatrix fake = g.forward(z, &gc);
  Discriminator::Cache cf;
  const GanMatrix c_real = d.forward(real), c_fake = d.forward(fake, &cf);
  const auto n = static_cast<double>(real.cols());
  const auto l = relativistic_losses(row_values(c_real), row_values(c_fake));
  GanMatrix df(1, real.cols());
  for (Eigen::Index i = 0; i < real.cols(); ++i) df(0, i) = -sigmoid(c_real(0, i) - c_fake(0, i)) / n;
  const GanMatrix dx = d.backward(fake, cf, df).second;
  return {l.g_loss, g.backward(z, gc, dx)};
}

class GanStepper {
 public:
  GanStepper(const GanConfig& cfg, double lr, std::size_t n) : cfg_(cfg), lr_(lr) {
    if (cfg.optimizer == GanOptimizer::Adam) {
      m_ = GanVector::Zero(static_cast<Eigen::Index>(n));
      v_ = GanVector::Zero(static_cast<Eigen::Index>(n));
    }
  }

  void step(GanVector& theta, const GanVector& grad) {
    if (cfg_.optimizer == GanOptimizer::Sgd) {
      theta -= lr_ * grad;
      return;
    }
    ++t_;
    m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
    v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg_.beta1, t_);
    const double c2 = 1.0 - std::pow(cfg_.beta2, t_);
    theta.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + 1e-8);
  }

 private:
  GanConfig cfg_;
  double lr_;
  GanVector m_, v_;
  int t_ = 0;
};

inline GanMatrix noise_matrix(int rows, Eigen::Index cols, Rng& rng) {
  GanMatrix z(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) z(i, j) = rng.normal();
  }
  return z;
}

/// Patterns resized to side x side, one flattened (row-major) column each.
inline GanMatrix square_columns(std::span<const Pattern> patterns, int side) {
  GanMatrix x(static_cast<Eigen::Index>(side) * side, static_cast<Eigen::Index>(patterns.size()));
  for (std::size_t j = 0; j < patterns.size(); ++j) {
    const GrayImage sq = resize_bilinear(patterns[j].pixels, side, side);
    for (std::size_t i = 0; i < sq.pixel_count(); ++i) {
      x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = sq.pixels()[i];
    }
  }
  return x;
}

struct GanTrainResult {
  Generator generator;
  Discriminator discriminator;
  std::vector<double> d_loss;
  std::vector<double> g_loss;
};

/**
 * Relativistic GAN on the patterns of one class, resized to a common
 * square. Each epoch is one critic step then one generator step on a
 * full batch of fresh noise paired with every real pattern.
 */
inline GanTrainResult train_rgan(std::span<const Pattern> patterns, const GanConfig& cfg, Rng& rng) {
  cfg.validate();
  if (patterns.size() < 2) {
    throw InvalidArgument("gan: need at least 2 patterns, got " + std::to_string(patterns.size()));
  }
  const int side = cfg.square_size > 0 ? cfg.square_size : gan_square_size(patterns);
  const int pixels = side * side;
  const GanMatrix real = square_columns(patterns, side);
  const Eigen::Index n = real.cols();

  GanTrainResult r;
  Rng init_rng = rng.child(1);
  r.generator.side = side;
  r.generator.net = TwoLayer(cfg.noise_dim, cfg.hidden, pixels);
  r.generator.net.init(init_rng);
  Discriminator& d = r.discriminator;
  d.net = TwoLayer(pixels, cfg.hidden, 1);
  d.net.init(init_rng);
  d.leak = cfg.leak;
  d.spectral_norm = cfg.spectral_norm;
  d.sn_rng = rng.child(2);
  const int full_iterations = d.sn_max_iterations;
  d.normalize();
  d.sn_max_iterations = cfg.power_iterations;

  GanStepper d_opt(cfg, cfg.lr_d, d.net.size());
  GanStepper g_opt(cfg, cfg.lr_g, r.generator.net.size());
  Rng noise = rng.child(3);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    d.normalize();
    const GanMatrix fake = r.generator.forward(noise_matrix(cfg.noise_dim, n, noise));
    const LossGrad dl = discriminator_loss_grad(d, real, fake);
    d_opt.step(d.net.theta, dl.grad);
    d.normalize();
    const LossGrad gl = generator_loss_grad(r.generator, d, real, noise_matrix(cfg.noise_dim, n, noise));
    g_opt.step(r.generator.net.theta, gl.grad);
    if (!std::isfinite(dl.loss) || !std::isfinite(gl.loss) || !dl.grad.allFinite() || !gl.grad.allFinite()) {
      throw NumericError("gan: non-finite loss at epoch " + std::to_string(epoch));
    }
    r.d_loss.push_back(dl.loss);
    r.g_loss.push_back(gl.loss);
  }
  d.sn_max_iterations = full_iterations;
  d.normalize();
  return r;
}

/**
 * `count` generator samples, each resized to a size drawn uniformly from
 * `original_sizes` and snapped to the pattern grid. Ids are
 * `<id_prefix><k>`.
 */
inline std::vector<Pattern> generate_gan_patterns(const Generator& g, std::size_t count,
                                                  std::span<const Size> original_sizes, Rng& rng,
                                                  const std::string& defect_class = {},
                                                  const std::string& id_prefix = "gan-") {
  if (original_sizes.empty()) throw InvalidArgument("gan: no original sizes to draw from");
  std::vector<Pattern> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const GanMatrix x = g.forward(noise_matrix(g.noise_dim(), 1, rng));
    const GrayImage sq = GrayImage::clamped(g.side, g.side, std::vector<double>(x.data(), x.data() + x.size()));
    const Size sz = original_sizes[rng.index(original_sizes.size())];
    Pattern p;
    p.pixels = quantize(resize_bilinear(sq, sz.width, sz.height), kPatternLevels);
    p.id = id_prefix + std::to_string(k);
    p.original_size = sz;
    p.provenance = Provenance::GanAug;
    p.defect_class = defect_class;
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace gadget::augment

#endif  // GADGET_AUGMENT_RGAN_HPP
