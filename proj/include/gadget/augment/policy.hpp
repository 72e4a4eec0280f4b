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

#ifndef GADGET_AUGMENT_POLICY_HPP
#define GADGET_AUGMENT_POLICY_HPP

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "gadget/core/resample.hpp"
#include "gadget/core/rng.hpp"
#include "gadget/core/types.hpp"

namespace gadget::augment {

enum class Operation { Rotate, ScaleX, ScaleY, Shear, FlipH, FlipV, Brightness, Contrast, GaussianNoise };

inline constexpr std::array<Operation, 9> kAllOperations = {
    Operation::Rotate, Operation::ScaleX,     Operation::ScaleY,   Operation::Shear,
    Operation::FlipH,  Operation::FlipV,      Operation::Brightness, Operation::Contrast,
    Operation::GaussianNoise};

inline std::string_view to_string(Operation op) {
  switch (op) {
    case Operation::Rotate: return "rotate";
    case Operation::ScaleX: return "scale_x";
    case Operation::ScaleY: return "scale_y";
    case Operation::Shear: return "shear";
    case Operation::FlipH: return "flip_h";
    case Operation::FlipV: return "flip_v";
    case Operation::Brightness: return "brightness";
    case Operation::Contrast: return "contrast";
    case Operation::GaussianNoise: return "noise";
  }
  return "?";
}

inline Operation parse_operation(std::string_view s) {
  for (Operation op : kAllOperations) {
    if (to_string(op) == s) return op;
  }
  throw InvalidArgument("unknown policy operation '" + std::string(s) + "'");
}

/// Magnitude that leaves a pattern unchanged.
inline double identity_magnitude(Operation op) {
  switch (op) {
    case Operation::ScaleX:
    case Operation::ScaleY:
    case Operation::Brightness:
    case Operation::Contrast: return 1.0;
    default: return 0.0;
  }
}

/**
 * An operation with the magnitude range it is sampled from. Units are
 * degrees for Rotate and Shear, a factor for scales, brightness and
 * contrast, sigma for noise, and for flips a value in [0, 1] where >= 0.5
 * flips.
 */
struct Policy {
  Operation operation = Operation::Rotate;
  double lo = 0.0;
  double hi = 0.0;

  void validate() const {
    if (!(lo < hi)) {
      throw InvalidArgument("policy " + std::string(to_string(operation)) + ": range lo must be < hi");
    }
  }

  bool contains(double magnitude) const noexcept { return magnitude >= lo && magnitude <= hi; }

  std::string name() const { return std::string(to_string(operation)); }

  bool operator==(const Policy&) const = default;
};

inline Policy default_policy(Operation op) {
  switch (op) {
    case Operation::Rotate: return {op, -30.0, 30.0};
    case Operation::ScaleX:
    case Operation::ScaleY: return {op, 0.7, 1.5};
    case Operation::Shear: return {op, -15.0, 15.0};
    case Operation::FlipH:
    case Operation::FlipV: return {op, 0.0, 1.0};
    case Operation::Brightness:
    case Operation::Contrast: return {op, 0.7, 1.3};
    case Operation::GaussianNoise: return {op, 0.0, 0.05};
  }
  return {op, 0.0, 1.0};
}

inline std::vector<Policy> default_policies() {
  std::vector<Policy> out;
  for (Operation op : kAllOperations) out.push_back(default_policy(op));
  return out;
}

namespace detail {

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }

/// Rotation about the centre; the output raster is the rotated bounding box.
inline GrayImage rotate(const GrayImage& img, double degrees) {
  const double t = deg_to_rad(degrees);
  const double c = std::cos(t), s = std::sin(t);
  const int w = img.width(), h = img.height();
  const int ow = std::max(1, static_cast<int>(std::lround(std::abs(w * c) + std::abs(h * s))));
  const int oh = std::max(1, static_cast<int>(std::lround(std::abs(w * s) + std::abs(h * c))));
  const double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
  const double ocx = (ow - 1) / 2.0, ocy = (oh - 1) / 2.0;
  std::vector<double> out(static_cast<std::size_t>(ow) * oh);
  for (int y = 0; y < oh; ++y) {
    for (int x = 0; x < ow; ++x) {
      const double u = x - ocx, v = y - ocy;
      out[static_cast<std::size_t>(y) * ow + x] =
          sample_bilinear_reflect(img, c * u + s * v + cx, -s * u + c * v + cy);
    }
  }
  return GrayImage::clamped(ow, oh, std::move(out));
}

/// Horizontal shear about the centre row, same raster size.
inline GrayImage shear(const GrayImage& img, double degrees) {
  const double k = std::tan(deg_to_rad(degrees));
  const int w = img.width(), h = img.height();
  const double cy = (h - 1) / 2.0;
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out[static_cast<std::size_t>(y) * w + x] = sample_bilinear_reflect(img, x + k * (y - cy), y);
    }
  }
  return GrayImage::clamped(w, h, std::move(out));
}

inline GrayImage scale(const GrayImage& img, double fx, double fy) {
  const long ow = std::lround(img.width() * fx);
  const long oh = std::lround(img.height() * fy);
  if (ow < 1 || oh < 1) {
    throw InvalidArgument("scale: " + std::to_string(img.width()) + "x" + std::to_string(img.height()) +
                          " would shrink to zero area");
  }
  return resize_bilinear(img, static_cast<int>(ow), static_cast<int>(oh));
}

inline GrayImage flip(const GrayImage& img, bool horizontal) {
  const int w = img.width(), h = img.height();
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      out[static_cast<std::size_t>(y) * w + x] = horizontal ? img.at(w - 1 - x, y) : img.at(x, h - 1 - y);
    }
  }
  return GrayImage(w, h, std::move(out));
}

template <typename F>
GrayImage map_pixels(const GrayImage& img, F f) {
  std::vector<double> out(img.pixels().begin(), img.pixels().end());
  for (double& v : out) v = f(v);
  return GrayImage::clamped(img.width(), img.height(), std::move(out));
}

}  // namespace detail

/// The raw transform, without range checks or quantization.
inline GrayImage transform(const GrayImage& img, Operation op, double magnitude, Rng& rng) {
  switch (op) {
    case Operation::Rotate: return magnitude == 0.0 ? img : detail::rotate(img, magnitude);
    case Operation::ScaleX: return detail::scale(img, magnitude, 1.0);
    case Operation::ScaleY: return detail::scale(img, 1.0, magnitude);
    case Operation::Shear: return magnitude == 0.0 ? img : detail::shear(img, magnitude);
    case Operation::FlipH: return magnitude >= 0.5 ? detail::flip(img, true) : img;
    case Operation::FlipV: return magnitude >= 0.5 ? detail::flip(img, false) : img;
    case Operation::Brightness:
      return detail::map_pixels(img, [&](double v) { return v * magnitude; });
    case Operation::Contrast: {
      double mean = 0.0;
      for (double v : img.pixels()) mean += v;
      mean /= static_cast<double>(img.pixel_count());
      return detail::map_pixels(img, [&](double v) { return (v - mean) * magnitude + mean; });
    }
    case Operation::GaussianNoise:
      if (magnitude == 0.0) return img;
      return detail::map_pixels(img, [&](double v) { return v + magnitude * rng.normal(); });
  }
  return img;
}

/**
 * Applies one policy at `magnitude`. The result keeps the source's class,
 * is marked PolicyAug and is snapped to the 16-bit pattern grid, so
 * on-grid inputs pass through identity magnitudes unchanged.
 */
inline Pattern apply_policy(const Pattern& pattern, const Policy& policy, double magnitude, Rng& rng) {
  policy.validate();
  if (!policy.contains(magnitude)) {
    throw InvalidArgument("policy " + policy.name() + ": magnitude " + std::to_string(magnitude) +
                          " outside [" + std::to_string(policy.lo) + ", " + std::to_string(policy.hi) + "]");
  }
  Pattern out;
  out.pixels = quantize(transform(pattern.pixels, policy.operation, magnitude, rng), kPatternLevels);
  out.id = pattern.id;
  out.original_size = out.pixels.size();
  out.provenance = Provenance::PolicyAug;
  out.defect_class = pattern.defect_class;
  out.source_image_id = pattern.source_image_id;
  return out;
}

}  // namespace gadget::augment

#endif  // GADGET_AUGMENT_POLICY_HPP
