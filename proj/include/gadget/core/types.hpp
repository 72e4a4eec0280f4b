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

#ifndef GADGET_CORE_TYPES_HPP
#define GADGET_CORE_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gadget/core/error.hpp"

namespace gadget {

struct Size {
  int width = 0;
  int height = 0;

  bool operator==(const Size&) const = default;
  auto operator<=>(const Size&) const = default;
};

/**
 * Row-major grayscale raster with intensities normalized to [0, 1].
 *
 * Immutable once built; construction validates the shape and the value
 * range, so every GrayImage in the system satisfies its invariants.
 */
class GrayImage {
 public:
  /// 1x1 black image.
  GrayImage() : width_(1), height_(1), data_(1, 0.0) {}

  GrayImage(int width, int height, std::vector<double> data)
      : width_(width), height_(height), data_(std::move(data)) {
    if (width_ < 1 || height_ < 1) {
      throw InvalidArgument("GrayImage: dimensions must be >= 1, got " + std::to_string(width_) +
                            "x" + std::to_string(height_));
    }
    if (data_.size() != static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_)) {
      throw InvalidArgument("GrayImage: data length " + std::to_string(data_.size()) +
                            " != width*height " + std::to_string(width_ * height_));
    }
    for (double v : data_) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidArgument("GrayImage: intensity outside [0,1]: " + std::to_string(v));
      }
    }
  }

  static GrayImage filled(int width, int height, double value) {
    return GrayImage(width, height,
                     std::vector<double>(static_cast<std::size_t>(std::max(width, 0)) *
                                             static_cast<std::size_t>(std::max(height, 0)),
                                         value));
  }

  /// Builds an image from arbitrary values, clamping into [0, 1]. NaN maps to 0.
  static GrayImage clamped(int width, int height, std::vector<double> data) {
    for (double& v : data) v = std::isnan(v) ? 0.0 : std::clamp(v, 0.0, 1.0);
    return GrayImage(width, height, std::move(data));
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Size size() const noexcept { return {width_, height_}; }
  std::size_t pixel_count() const noexcept { return data_.size(); }

  double at(int x, int y) const noexcept {
    return data_[static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(x)];
  }
  const double* row(int y) const noexcept {
    return data_.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(width_);
  }
  std::span<const double> pixels() const noexcept { return data_; }

  /// Copy of the half-open region [x0,x1) x [y0,y1); the region must be in bounds.
  GrayImage crop(int x0, int y0, int x1, int y1) const {
    if (x0 < 0 || y0 < 0 || x1 > width_ || y1 > height_ || x0 >= x1 || y0 >= y1) {
      throw InvalidArgument("GrayImage::crop: region out of bounds or empty");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(x1 - x0) * static_cast<std::size_t>(y1 - y0));
    for (int y = y0; y < y1; ++y) {
      const double* r = row(y);
      out.insert(out.end(), r + x0, r + x1);
    }
    return GrayImage(x1 - x0, y1 - y0, std::move(out));
  }

  bool operator==(const GrayImage&) const = default;

 private:
  int width_;
  int height_;
  std::vector<double> data_;
};

/// Worker-drawn rectangle, half-open: [x0, x1) x [y0, y1).
struct BoundingBox {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;
  std::string worker_id;
  std::string image_id;
  std::string defect_class;

  int width() const noexcept { return x1 - x0; }
  int height() const noexcept { return y1 - y0; }
  long long area() const noexcept {
    return x1 > x0 && y1 > y0 ? static_cast<long long>(x1 - x0) * (y1 - y0) : 0;
  }
  bool fits(int image_width, int image_height) const noexcept {
    return 0 <= x0 && x0 < x1 && x1 <= image_width && 0 <= y0 && y0 < y1 && y1 <= image_height;
  }
  void validate(int image_width, int image_height) const {
    if (!fits(image_width, image_height)) {
      throw InvalidArgument("BoundingBox (" + std::to_string(x0) + "," + std::to_string(y0) + "," +
                            std::to_string(x1) + "," + std::to_string(y1) +
                            ") is empty or outside a " + std::to_string(image_width) + "x" +
                            std::to_string(image_height) + " image");
    }
  }
  bool same_rect(const BoundingBox& o) const noexcept {
    return x0 == o.x0 && y0 == o.y0 && x1 == o.x1 && y1 == o.y1;
  }

  bool operator==(const BoundingBox&) const = default;
};

enum class Provenance { Crowd, PolicyAug, GanAug };

inline std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::Crowd: return "crowd";
    case Provenance::PolicyAug: return "policy";
    case Provenance::GanAug: return "gan";
  }
  return "crowd";
}

inline Provenance parse_provenance(std::string_view s) {
  if (s == "crowd") return Provenance::Crowd;
  if (s == "policy") return Provenance::PolicyAug;
  if (s == "gan") return Provenance::GanAug;
  throw InvalidArgument("unknown provenance '" + std::string(s) + "'");
}

/// A matching template; each pattern acts as one feature-generation function.
struct Pattern {
  std::string id;
  GrayImage pixels;
  Size original_size;
  Provenance provenance = Provenance::Crowd;
  std::string defect_class;
  /// Image the pattern was cut from (crowd) or derived from; may be empty.
  std::string source_image_id;

  int width() const noexcept { return pixels.width(); }
  int height() const noexcept { return pixels.height(); }

  bool operator==(const Pattern&) const = default;
};

struct DevEntry {
  std::string image_id;
  std::string gold_label;

  bool operator==(const DevEntry&) const = default;
};

/**
 * Gold-labeled images gathered while annotating. When `normal_class` is set
 * (binary tasks) every other label counts as defective; multi-class tasks
 * have no normal class and every entry is defective.
 */
class DevelopmentSet {
 public:
  DevelopmentSet() = default;
  DevelopmentSet(std::vector<std::string> class_set, std::optional<std::string> normal_class)
      : class_set_(std::move(class_set)), normal_class_(std::move(normal_class)) {
    if (normal_class_ && std::find(class_set_.begin(), class_set_.end(), *normal_class_) ==
                             class_set_.end()) {
      throw InvalidArgument("normal class '" + *normal_class_ + "' not in class set");
    }
  }

  void add(DevEntry entry) {
    if (std::find(class_set_.begin(), class_set_.end(), entry.gold_label) == class_set_.end()) {
      throw InvalidArgument("gold label '" + entry.gold_label + "' for image '" + entry.image_id +
                            "' is not in the class set");
    }
    if (contains(entry.image_id)) {
      throw InvalidArgument("image '" + entry.image_id + "' already in development set");
    }
    if (is_defect(entry.gold_label)) ++defect_count_;
    entries_.push_back(std::move(entry));
  }

  bool contains(std::string_view image_id) const {
    return std::any_of(entries_.begin(), entries_.end(),
                       [&](const DevEntry& e) { return e.image_id == image_id; });
  }
  bool is_defect(std::string_view label) const { return !normal_class_ || label != *normal_class_; }

  const std::vector<DevEntry>& entries() const noexcept { return entries_; }
  const std::vector<std::string>& class_set() const noexcept { return class_set_; }
  const std::optional<std::string>& normal_class() const noexcept { return normal_class_; }
  std::size_t size() const noexcept { return entries_.size(); }
  std::size_t defect_count() const noexcept { return defect_count_; }

  bool operator==(const DevelopmentSet&) const = default;

 private:
  std::vector<DevEntry> entries_;
  std::vector<std::string> class_set_;
  std::optional<std::string> normal_class_;
  std::size_t defect_count_ = 0;
};

/// Max-NCC similarities of one image against a frozen, ordered pattern list.
struct FeatureVector {
  std::string image_id;
  std::vector<double> values;

  bool operator==(const FeatureVector&) const = default;
};

struct WeakLabel {
  std::string image_id;
  std::size_t predicted_index = 0;
  std::string predicted_class;
  std::vector<double> probabilities;

  bool operator==(const WeakLabel&) const = default;
};

/// Index of the largest value; the lowest index wins ties.
inline std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

inline WeakLabel make_weak_label(std::string image_id, std::span<const std::string> classes,
                                 std::vector<double> probabilities) {
  if (probabilities.size() != classes.size() || classes.empty()) {
    throw InvalidArgument("weak label: " + std::to_string(probabilities.size()) +
                          " probabilities for " + std::to_string(classes.size()) + " classes");
  }
  double sum = 0.0;
  for (double p : probabilities) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("weak label: probability outside [0,1]");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw InvalidArgument("weak label: probabilities sum to " + std::to_string(sum));
  }
  const std::size_t k = argmax(probabilities);
  return WeakLabel{std::move(image_id), k, classes[k], std::move(probabilities)};
}

}  // namespace gadget

#endif  // GADGET_CORE_TYPES_HPP
