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

#ifndef GADGET_CORE_RESAMPLE_HPP
#define GADGET_CORE_RESAMPLE_HPP

#include <cmath>
#include <vector>

#include "gadget/core/types.hpp"

namespace gadget {

/// Mirror index into [0, n) without repeating the edge sample (…2 1 0 1 2…).
inline int reflect_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

/// Bilinear sample at continuous pixel coordinates (pixel centers at integers),
/// with reflection outside the raster.
inline double sample_bilinear_reflect(const GrayImage& img, double x, double y) {
  const double fx = std::floor(x);
  const double fy = std::floor(y);
  const double ax = x - fx;
  const double ay = y - fy;
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const int w = img.width();
  const int h = img.height();
  const int xa = reflect_index(x0, w), xb = reflect_index(x0 + 1, w);
  const int ya = reflect_index(y0, h), yb = reflect_index(y0 + 1, h);
  const double top = img.at(xa, ya) * (1.0 - ax) + img.at(xb, ya) * ax;
  const double bot = img.at(xa, yb) * (1.0 - ax) + img.at(xb, yb) * ax;
  return top * (1.0 - ay) + bot * ay;
}

/**
 * Bilinear resize with half-pixel centers and edge clamping. Resizing to the
 * same size is the identity.
 */
inline GrayImage resize_bilinear(const GrayImage& img, int width, int height) {
  if (width < 1 || height < 1) {
    throw InvalidArgument("resize: target " + std::to_string(width) + "x" +
                          std::to_string(height) + " has zero area");
  }
  if (width == img.width() && height == img.height()) return img;
  const double sx = static_cast<double>(img.width()) / width;
  const double sy = static_cast<double>(img.height()) / height;
  std::vector<double> out(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    const double srcy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height() - 1.0);
    const int y0 = static_cast<int>(srcy);
    const int y1 = std::min(y0 + 1, img.height() - 1);
    const double ay = srcy - y0;
    for (int x = 0; x < width; ++x) {
      const double srcx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width() - 1.0);
      const int x0 = static_cast<int>(srcx);
      const int x1 = std::min(x0 + 1, img.width() - 1);
      const double ax = srcx - x0;
      const double top = img.at(x0, y0) * (1.0 - ax) + img.at(x1, y0) * ax;
      const double bot = img.at(x0, y1) * (1.0 - ax) + img.at(x1, y1) * ax;
      out[static_cast<std::size_t>(y) * width + x] = top * (1.0 - ay) + bot * ay;
    }
  }
  return GrayImage::clamped(width, height, std::move(out));
}

/// Snap every intensity to the nearest multiple of 1/levels.
inline GrayImage quantize(const GrayImage& img, int levels) {
  std::vector<double> out(img.pixels().begin(), img.pixels().end());
  for (double& v : out) v = std::round(v * levels) / levels;
  return GrayImage::clamped(img.width(), img.height(), std::move(out));
}

/// Quantization grid of stored patterns (16-bit PNG).
inline constexpr int kPatternLevels = 65535;
/// Quantization grid of stored images (8-bit PNG).
inline constexpr int kImageLevels = 255;

}  // namespace gadget

#endif  // GADGET_CORE_RESAMPLE_HPP
