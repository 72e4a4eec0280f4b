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

#ifndef GADGET_MATCH_PYRAMID_HPP
#define GADGET_MATCH_PYRAMID_HPP

#include <algorithm>
#include <cstdlib>
#include <string>
#include <tuple>
#include <vector>

#include "gadget/core/types.hpp"
#include "gadget/match/ncc.hpp"

namespace gadget::match {

/// Coarse-to-fine search parameters. levels == 0 selects the level count
/// automatically so the coarsest pattern side stays >= kMinCoarseSide.
struct PyramidConfig {
  int levels = 0;
  int factor = 2;
  int candidates = 5;

  void validate() const {
    if (levels < 0) throw InvalidArgument("pyramid levels must be >= 1 (or 0 for auto)");
    if (factor < 2) throw InvalidArgument("pyramid factor must be >= 2");
    if (candidates < 1) throw InvalidArgument("pyramid candidates must be >= 1");
  }
};

inline constexpr int kMinCoarseSide = 8;

/// Owning raster used for the reduced levels.
struct Plane {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  PlaneView view() const noexcept { return {data.data(), width, height}; }
};

/// Block-average reduction by `factor`; the remainder rows/columns are dropped.
inline Plane reduce(PlaneView src, int factor) {
  Plane out{src.width / factor, src.height / factor, {}};
  out.data.assign(static_cast<std::size_t>(out.width) * out.height, 0.0);
  const double inv = 1.0 / (factor * factor);
  for (int y = 0; y < out.height; ++y) {
    for (int x = 0; x < out.width; ++x) {
      double s = 0.0;
      for (int dy = 0; dy < factor; ++dy) {
        const double* r = src.row(y * factor + dy) + x * factor;
        for (int dx = 0; dx < factor; ++dx) s += r[dx];
      }
      out.data[static_cast<std::size_t>(y) * out.width + x] = s * inv;
    }
  }
  return out;
}

/// Number of levels such that the pattern's shorter side is still
/// >= kMinCoarseSide at the coarsest one.
inline int auto_levels(int pattern_width, int pattern_height, int factor) {
  int levels = 1;
  long long side = std::min(pattern_width, pattern_height);
  while (side / factor >= kMinCoarseSide) {
    side /= factor;
    ++levels;
  }
  return levels;
}

/// Pattern with its reduced levels and energies precomputed.
class PreparedPattern {
 public:
  PreparedPattern(const GrayImage& pattern, int factor) : base_(view(pattern)), factor_(factor) {
    const int levels = auto_levels(pattern.width(), pattern.height(), factor);
    energies_.push_back(energy(base_));
    for (int l = 1; l < levels; ++l) {
      reduced_.push_back(reduce(level(l - 1), factor));
      energies_.push_back(energy(reduced_.back().view()));
    }
    auto_levels_ = levels;
  }

  /// Extends the reduction chain so that `levels` exist; throws when a
  /// level would be empty.
  void ensure_levels(int levels) {
    while (static_cast<int>(energies_.size()) < levels) {
      const PlaneView prev = level(static_cast<int>(energies_.size()) - 1);
      if (prev.width / factor_ < 1 || prev.height / factor_ < 1) {
        throw InvalidArgument("pyramid: pattern " + std::to_string(base_.width) + "x" +
                              std::to_string(base_.height) + " vanishes below 1x1 at level " +
                              std::to_string(energies_.size()));
      }
      reduced_.push_back(reduce(prev, factor_));
      energies_.push_back(energy(reduced_.back().view()));
    }
  }

  PlaneView level(int l) const noexcept { return l == 0 ? base_ : reduced_[l - 1].view(); }
  double energy_at(int l) const noexcept { return energies_[l]; }
  int auto_level_count() const noexcept { return auto_levels_; }
  int level_count() const noexcept { return static_cast<int>(energies_.size()); }
  int factor() const noexcept { return factor_; }
  int width() const noexcept { return base_.width; }
  int height() const noexcept { return base_.height; }

 private:
  PlaneView base_;
  int factor_;
  int auto_levels_ = 1;
  std::vector<Plane> reduced_;
  std::vector<double> energies_;
};

/**
 * Image with lazily built reduced levels and, per level, a summed-area
 * table of squared intensities for O(1) window energies.
 */
class PreparedImage {
 public:
  PreparedImage(const GrayImage& image, int factor) : base_(view(image)), factor_(factor) {}

  void ensure_levels(int levels) {
    while (static_cast<int>(reduced_.size()) + 1 < levels) {
      reduced_.push_back(reduce(level(static_cast<int>(reduced_.size())), factor_));
    }
    while (static_cast<int>(squares_.size()) < levels) {
      const PlaneView p = level(static_cast<int>(squares_.size()));
      std::vector<double> sat(static_cast<std::size_t>(p.width + 1) * (p.height + 1), 0.0);
      for (int y = 0; y < p.height; ++y) {
        double rowsum = 0.0;
        const double* r = p.row(y);
        for (int x = 0; x < p.width; ++x) {
          rowsum += r[x] * r[x];
          sat[static_cast<std::size_t>(y + 1) * (p.width + 1) + x + 1] =
              sat[static_cast<std::size_t>(y) * (p.width + 1) + x + 1] + rowsum;
        }
      }
      squares_.push_back(std::move(sat));
    }
  }

  PlaneView level(int l) const noexcept { return l == 0 ? base_ : reduced_[l - 1].view(); }

  /// Sum of squares over [x, x+w) x [y, y+h) at level l.
  double window_energy(int l, int x, int y, int w, int h) const noexcept {
    const auto& sat = squares_[l];
    const auto stride = static_cast<std::size_t>(level(l).width + 1);
    const double v = sat[(y + h) * stride + x + w] - sat[y * stride + x + w] -
                     sat[(y + h) * stride + x] + sat[y * stride + x];
    return v > 0.0 ? v : 0.0;
  }

  int factor() const noexcept { return factor_; }

 private:
  PlaneView base_;
  int factor_;
  std::vector<Plane> reduced_;
  std::vector<std::vector<double>> squares_;
};

namespace detail {

struct Scored {
  double score;
  int x;
  int y;
};

/// Screening score at a reduced level: direct numerator, window energy from
/// the summed-area table.
inline double coarse_score(const PreparedImage& img, const PreparedPattern& pat, int l, int x, int y) {
  const PlaneView I = img.level(l);
  const PlaneView P = pat.level(l);
  double num = 0.0;
  for (int py = 0; py < P.height; ++py) {
    const double* prow = P.row(py);
    const double* irow = I.row(y + py) + x;
    for (int px = 0; px < P.width; ++px) num += prow[px] * irow[px];
  }
  return ncc_value(num, pat.energy_at(l), img.window_energy(l, x, y, P.width, P.height));
}

/// Best-first selection of up to k placements, skipping any within
/// Chebyshev distance `radius` of one already taken.
inline std::vector<Scored> select_candidates(std::vector<Scored> all, int k, int radius) {
  std::sort(all.begin(), all.end(), [](const Scored& a, const Scored& b) {
    return std::tie(b.score, a.y, a.x) < std::tie(a.score, b.y, b.x);
  });
  std::vector<Scored> picked;
  for (const auto& s : all) {
    if (static_cast<int>(picked.size()) >= k) break;
    const bool near = std::any_of(picked.begin(), picked.end(), [&](const Scored& p) {
      return std::abs(p.x - s.x) <= radius && std::abs(p.y - s.y) <= radius;
    });
    if (!near) picked.push_back(s);
  }
  return picked;
}

}  // namespace detail

/**
 * Coarse-to-fine NCC search. Every placement is scored at the coarsest
 * level, the best `candidates` (with neighbour suppression) are refined over
 * a +/-factor neighbourhood at each finer level, and full-resolution scores
 * are exact, so the result never exceeds match_exhaustive. One level is
 * exactly match_exhaustive. `pattern` must already hold the requested levels.
 */
inline MatchResult match_prepared(PreparedImage& image, const PreparedPattern& pattern,
                                  const PyramidConfig& config) {
  const PlaneView full = image.level(0);
  require_fits(full, pattern.level(0));
  const int levels = config.levels == 0 ? pattern.auto_level_count() : config.levels;
  if (levels > pattern.level_count()) {
    throw InvalidArgument("pyramid: pattern prepared with fewer levels than requested");
  }
  if (levels == 1) return match_exhaustive(full, pattern.level(0));
  image.ensure_levels(levels);

  const int f = config.factor;
  const int top = levels - 1;
  std::vector<detail::Scored> scored;
  {
    const PlaneView I = image.level(top);
    const PlaneView P = pattern.level(top);
    if (P.width > I.width || P.height > I.height) {
      return match_exhaustive(full, pattern.level(0));
    }
    for (int y = 0; y <= I.height - P.height; ++y) {
      for (int x = 0; x <= I.width - P.width; ++x) {
        scored.push_back({detail::coarse_score(image, pattern, top, x, y), x, y});
      }
    }
  }
  std::vector<detail::Scored> candidates =
      detail::select_candidates(std::move(scored), config.candidates, 1);

  std::vector<double> num, win, row;
  for (int l = top - 1; l >= 0; --l) {
    const PlaneView I = image.level(l);
    const PlaneView P = pattern.level(l);
    const int max_x = I.width - P.width;
    const int max_y = I.height - P.height;
    std::vector<char> visited(static_cast<std::size_t>(max_x + 1) * (max_y + 1), 0);
    std::vector<detail::Scored> next;
    for (const auto& c : candidates) {
      const int x_lo = std::max(0, c.x * f - f), x_hi = std::min(max_x, c.x * f + f);
      const int y_lo = std::max(0, c.y * f - f), y_hi = std::min(max_y, c.y * f + f);
      if (x_lo > x_hi || y_lo > y_hi) continue;
      for (int y = y_lo; y <= y_hi; ++y) {
        if (l == 0) {
          row.resize(static_cast<std::size_t>(x_hi - x_lo + 1));
          detail::ncc_row(I, P, pattern.energy_at(0), y, x_lo, x_hi + 1, num, win, row.data());
        }
        for (int x = x_lo; x <= x_hi; ++x) {
          char& seen = visited[static_cast<std::size_t>(y) * (max_x + 1) + x];
          if (seen) continue;
          seen = 1;
          const double s = l == 0 ? row[static_cast<std::size_t>(x - x_lo)]
                                  : detail::coarse_score(image, pattern, l, x, y);
          next.push_back({s, x, y});
        }
      }
    }
    if (l == 0) {
      MatchResult best{-1.0, 0, 0};
      for (const auto& s : next) {
        if (s.score > best.similarity ||
            (s.score == best.similarity && std::tie(s.y, s.x) < std::tie(best.y, best.x))) {
          best = {s.score, s.x, s.y};
        }
      }
      return best;
    }
    candidates = detail::select_candidates(std::move(next), config.candidates, 1);
  }
  return {};  // unreachable: the loop returns at level 0
}

inline MatchResult match_pyramid(const GrayImage& image, const GrayImage& pattern,
                                 const PyramidConfig& config = {}) {
  config.validate();
  PreparedImage img(image, config.factor);
  PreparedPattern pat(pattern, config.factor);
  if (config.levels > 1) pat.ensure_levels(config.levels);
  return match_prepared(img, pat, config);
}

}  // namespace gadget::match

#endif  // GADGET_MATCH_PYRAMID_HPP
