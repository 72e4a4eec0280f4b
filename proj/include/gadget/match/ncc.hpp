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

#ifndef GADGET_MATCH_NCC_HPP
#define GADGET_MATCH_NCC_HPP

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gadget/core/types.hpp"

namespace gadget::match {

/// Non-owning row-major raster.
struct PlaneView {
  const double* data = nullptr;
  int width = 0;
  int height = 0;

  const double* row(int y) const noexcept {
    return data + static_cast<std::size_t>(y) * static_cast<std::size_t>(width);
  }
  double at(int x, int y) const noexcept { return row(y)[x]; }
};

inline PlaneView view(const GrayImage& img) noexcept {
  return {img.pixels().data(), img.width(), img.height()};
}

struct Similarity {
  double value = 0.0;
  /// Pattern or window energy was zero; value is 0 by definition.
  bool degenerate = false;
};

struct MatchResult {
  double similarity = 0.0;
  int x = 0;
  int y = 0;

  bool operator==(const MatchResult&) const = default;
};

class PatternTooLarge : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// Sum of squares in row-major order.
inline double energy(PlaneView p) noexcept {
  double s = 0.0;
  for (int y = 0; y < p.height; ++y) {
    const double* r = p.row(y);
    for (int x = 0; x < p.width; ++x) s += r[x] * r[x];
  }
  return s;
}

/// |num| / sqrt(pattern_energy * window_energy), clamped to [0, 1]; zero
/// energy on either side yields 0.
inline double ncc_value(double num, double pattern_energy, double window_energy) noexcept {
  if (pattern_energy == 0.0 || window_energy == 0.0) return 0.0;
  return std::min(1.0, std::abs(num) / std::sqrt(pattern_energy * window_energy));
}

inline void require_fits(PlaneView image, PlaneView pattern) {
  if (pattern.width > image.width || pattern.height > image.height) {
    throw PatternTooLarge("pattern " + std::to_string(pattern.width) + "x" +
                          std::to_string(pattern.height) + " does not fit image " +
                          std::to_string(image.width) + "x" + std::to_string(image.height));
  }
}

/**
 * Normalized cross-correlation of `pattern` placed with its top-left corner
 * at (x, y):
 *
 *   |sum P(x',y') I(x+x',y+y')| / sqrt(sum P^2 * sum I(x+x',y+y')^2)
 *
 * Sums run row-major over the pattern. The result lies in [0, 1] for
 * nonnegative intensities.
 */
inline Similarity ncc_at(PlaneView image, PlaneView pattern, int x, int y) {
  require_fits(image, pattern);
  if (x < 0 || y < 0 || x > image.width - pattern.width || y > image.height - pattern.height) {
    throw InvalidArgument("placement (" + std::to_string(x) + "," + std::to_string(y) +
                          ") puts the pattern outside the image");
  }
  double num = 0.0;
  double win = 0.0;
  for (int py = 0; py < pattern.height; ++py) {
    const double* prow = pattern.row(py);
    const double* irow = image.row(y + py) + x;
    for (int px = 0; px < pattern.width; ++px) {
      num += prow[px] * irow[px];
      win += irow[px] * irow[px];
    }
  }
  const double pe = energy(pattern);
  return {ncc_value(num, pe, win), pe == 0.0 || win == 0.0};
}

inline Similarity ncc_at(const GrayImage& image, const GrayImage& pattern, int x, int y) {
  return ncc_at(view(image), view(pattern), x, y);
}

namespace detail {

/**
 * Exact similarities for placements (x, y), x in [x_begin, x_end), written to
 * out[x - x_begin]. Each placement accumulates its sums in the same order as
 * ncc_at, so the results are bit-identical to it; the loop runs across
 * placements, which lets the compiler vectorize without reassociating.
 */
inline void ncc_row(PlaneView image, PlaneView pattern, double pattern_energy, int y, int x_begin,
                    int x_end, std::vector<double>& num, std::vector<double>& win, double* out) {
  const auto n = static_cast<std::size_t>(x_end - x_begin);
  num.assign(n, 0.0);
  win.assign(n, 0.0);
  double* __restrict nump = num.data();
  double* __restrict winp = win.data();
  for (int py = 0; py < pattern.height; ++py) {
    const double* prow = pattern.row(py);
    const double* irow = image.row(y + py) + x_begin;
    for (int px = 0; px < pattern.width; ++px) {
      const double pv = prow[px];
      const double* __restrict src = irow + px;
      for (std::size_t i = 0; i < n; ++i) {
        nump[i] += pv * src[i];
        winp[i] += src[i] * src[i];
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) out[i] = ncc_value(nump[i], pattern_energy, winp[i]);
}

}  // namespace detail

/**
 * Best placement over every window of the pattern's size. Ties resolve to the
 * lowest (y, x) in lexicographic order.
 */
inline MatchResult match_exhaustive(PlaneView image, PlaneView pattern) {
  require_fits(image, pattern);
  const double pe = energy(pattern);
  const int nx = image.width - pattern.width + 1;
  const int ny = image.height - pattern.height + 1;
  std::vector<double> num, win, scores(static_cast<std::size_t>(nx));
  MatchResult best{-1.0, 0, 0};
  for (int y = 0; y < ny; ++y) {
    detail::ncc_row(image, pattern, pe, y, 0, nx, num, win, scores.data());
    for (int x = 0; x < nx; ++x) {
      if (scores[static_cast<std::size_t>(x)] > best.similarity) {
        best = {scores[static_cast<std::size_t>(x)], x, y};
      }
    }
  }
  return best;
}

inline MatchResult match_exhaustive(const GrayImage& image, const GrayImage& pattern) {
  return match_exhaustive(view(image), view(pattern));
}

}  // namespace gadget::match

#endif  // GADGET_MATCH_NCC_HPP
