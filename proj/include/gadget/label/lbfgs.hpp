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

#ifndef GADGET_LABEL_LBFGS_HPP
#define GADGET_LABEL_LBFGS_HPP

#include <Eigen/Dense>

#include <cmath>
#include <algorithm>
#include <deque>
#include <limits>
#include <utility>
#include <vector>

#include "gadget/core/error.hpp"

namespace gadget::label {

using Vector = Eigen::VectorXd;

struct LbfgsOptions {
  int history = 10;
  /// Trial step length for a steepest-descent iteration (the first one and
  /// after a reset); quasi-Newton iterations start from 1.
  double initial_step = 1e-5;
  double c1 = 1e-4;
  double c2 = 0.9;
  double expansion = 4.0;
  int max_evaluations = 40;
  double gradient_tolerance = 1e-10;
};

enum class LbfgsStatus { Progress, Converged, LineSearchFailed };

/**
 * Limited-memory BFGS with a strong-Wolfe line search, advanced one
 * iteration at a time so callers can monitor progress between steps.
 * The objective is `double fg(const Vector& x, Vector& grad)`.
 */
class Lbfgs {
 public:
  explicit Lbfgs(LbfgsOptions options = {}) : opt_(options) {
    if (opt_.history < 1) throw InvalidArgument("lbfgs: history must be >= 1");
    if (!(opt_.c1 > 0 && opt_.c1 < opt_.c2 && opt_.c2 < 1)) {
      throw InvalidArgument("lbfgs: need 0 < c1 < c2 < 1");
    }
    if (!(opt_.initial_step > 0)) throw InvalidArgument("lbfgs: initial_step must be > 0");
  }

  template <typename Fg>
  void start(Fg&& fg, const Vector& x0) {
    x_ = x0;
    g_.resize(x_.size());
    f_ = fg(x_, g_);
    if (!std::isfinite(f_)) throw NumericError("lbfgs: non-finite objective at the starting point");
    s_.clear();
    y_.clear();
    evaluations_ = 1;
  }

  template <typename Fg>
  LbfgsStatus step(Fg&& fg) {
    if (g_.norm() <= opt_.gradient_tolerance) return LbfgsStatus::Converged;
    Vector d = direction();
    double dphi0 = g_.dot(d);
    bool steepest = s_.empty();
    if (!(dphi0 < 0)) {
      s_.clear();
      y_.clear();
      d = -g_;
      dphi0 = g_.dot(d);
      steepest = true;
    }
    const double a0 = steepest ? opt_.initial_step : 1.0;
    Vector x_new, g_new;
    double f_new = 0.0;
    if (!line_search(fg, d, dphi0, a0, x_new, f_new, g_new)) {
      if (!steepest) {
        // Drop curvature history and retry along -g once.
        s_.clear();
        y_.clear();
        d = -g_;
        dphi0 = g_.dot(d);
        if (!line_search(fg, d, dphi0, opt_.initial_step, x_new, f_new, g_new)) {
          return LbfgsStatus::LineSearchFailed;
        }
      } else {
        return LbfgsStatus::LineSearchFailed;
      }
    }
    Vector s = x_new - x_;
    Vector y = g_new - g_;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      s_.push_back(std::move(s));
      y_.push_back(std::move(y));
      if (static_cast<int>(s_.size()) > opt_.history) {
        s_.pop_front();
        y_.pop_front();
      }
    }
    const double f_old = f_;
    x_ = std::move(x_new);
    g_ = std::move(g_new);
    f_ = f_new;
    if (g_.norm() <= opt_.gradient_tolerance) return LbfgsStatus::Converged;
    if (std::abs(f_old - f_) <= std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(f_))) {
      return LbfgsStatus::Converged;
    }
    return LbfgsStatus::Progress;
  }

  const Vector& x() const noexcept { return x_; }
  const Vector& gradient() const noexcept { return g_; }
  double value() const noexcept { return f_; }
  long evaluations() const noexcept { return evaluations_; }

 private:
  /// Two-loop recursion: returns -H g.
  Vector direction() const {
    Vector q = g_;
    const std::size_t m = s_.size();
    std::vector<double> alpha(m), rho(m);
    for (std::size_t i = m; i-- > 0;) {
      rho[i] = 1.0 / y_[i].dot(s_[i]);
      alpha[i] = rho[i] * s_[i].dot(q);
      q -= alpha[i] * y_[i];
    }
    if (m > 0) q *= s_.back().dot(y_.back()) / y_.back().squaredNorm();
    for (std::size_t i = 0; i < m; ++i) {
      const double beta = rho[i] * y_[i].dot(q);
      q += (alpha[i] - beta) * s_[i];
    }
    return -q;
  }

  struct Point {
    double a, f, dphi;
  };

  template <typename Fg>
  bool line_search(Fg&& fg, const Vector& d, double dphi0, double a0, Vector& x_out, double& f_out,
                   Vector& g_out) {
    const double f0 = f_;
    Vector g(x_.size());
    Vector x;
    int budget = opt_.max_evaluations;
    // Best Armijo-satisfying point seen, used if Wolfe is never met.
    bool have_fallback = false;
    double fb_f = f0;
    Vector fb_x, fb_g;

    auto eval = [&](double a) -> Point {
      x = x_ + a * d;
      const double f = fg(x, g);
      ++evaluations_;
      --budget;
      const Point p{a, std::isfinite(f) ? f : std::numeric_limits<double>::infinity(),
                    std::isfinite(f) ? g.dot(d) : 0.0};
      if (std::isfinite(p.f) && p.f <= f0 + opt_.c1 * a * dphi0 && p.f < fb_f) {
        have_fallback = true;
        fb_f = p.f;
        fb_x = x;
        fb_g = g;
      }
      return p;
    };
    auto accept = [&](const Point& p) {
      x_out = x;
      f_out = p.f;
      g_out = g;
      return true;
    };
    auto fallback = [&] {
      if (!have_fallback) return false;
      x_out = std::move(fb_x);
      f_out = fb_f;
      g_out = std::move(fb_g);
      return true;
    };
    auto armijo_fails = [&](const Point& p) { return !(p.f <= f0 + opt_.c1 * p.a * dphi0); };
    auto curvature_ok = [&](const Point& p) { return std::abs(p.dphi) <= -opt_.c2 * dphi0; };

    auto zoom = [&](Point lo, Point hi) -> bool {
      while (budget > 0) {
        double a = cubic_min(lo, hi);
        const double lo_a = std::min(lo.a, hi.a), hi_a = std::max(lo.a, hi.a);
        const double margin = 0.1 * (hi_a - lo_a);
        if (!std::isfinite(a) || a < lo_a + margin || a > hi_a - margin) a = 0.5 * (lo.a + hi.a);
        if (hi_a - lo_a <= 1e-16 * std::max(1.0, hi_a)) break;
        const Point p = eval(a);
        if (armijo_fails(p) || p.f >= lo.f) {
          hi = p;
        } else {
          if (curvature_ok(p)) return accept(p);
          if (p.dphi * (hi.a - lo.a) >= 0) hi = lo;
          lo = p;
        }
      }
      return fallback();
    };

    Point prev{0.0, f0, dphi0};
    double a = a0;
    for (int i = 0; budget > 0; ++i) {
      const Point p = eval(a);
      if (!std::isfinite(p.f)) return zoom(prev, Point{a, p.f, 0.0});
      if (armijo_fails(p) || (i > 0 && p.f >= prev.f)) return zoom(prev, p);
      if (curvature_ok(p)) return accept(p);
      if (p.dphi >= 0) return zoom(p, prev);
      prev = p;
      a *= opt_.expansion;
    }
    return fallback();
  }

  /// Minimizer of the cubic through two points with slopes; NaN if none.
  static double cubic_min(const Point& p, const Point& q) {
    if (!std::isfinite(p.f) || !std::isfinite(q.f)) return std::numeric_limits<double>::quiet_NaN();
    const double d1 = p.dphi + q.dphi - 3.0 * (p.f - q.f) / (p.a - q.a);
    const double disc = d1 * d1 - p.dphi * q.dphi;
    if (disc < 0) return std::numeric_limits<double>::quiet_NaN();
    const double d2 = std::copysign(std::sqrt(disc), q.a - p.a);
    return q.a - (q.a - p.a) * (q.dphi + d2 - d1) / (q.dphi - p.dphi + 2.0 * d2);
  }

  LbfgsOptions opt_;
  Vector x_, g_;
  double f_ = 0.0;
  long evaluations_ = 0;
  std::deque<Vector> s_, y_;
};

}  // namespace gadget::label

#endif  // GADGET_LABEL_LBFGS_HPP
