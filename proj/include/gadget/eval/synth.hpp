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

#ifndef GADGET_EVAL_SYNTH_HPP
#define GADGET_EVAL_SYNTH_HPP

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <vector>

#include "gadget/core/json.hpp"
#include "gadget/core/resample.hpp"
#include "gadget/core/rng.hpp"
#include "gadget/core/types.hpp"
#include "gadget/store/manifest.hpp"

namespace gadget::eval {

enum class DefectShape { Scratch, Bubble, Stamping };

inline std::string_view to_string(DefectShape s) {
  switch (s) {
    case DefectShape::Scratch: return "scratch";
    case DefectShape::Bubble: return "bubble";
    case DefectShape::Stamping: return "stamping";
  }
  return "?";
}

inline DefectShape parse_defect_shape(std::string_view s) {
  for (auto d : {DefectShape::Scratch, DefectShape::Bubble, DefectShape::Stamping}) {
    if (to_string(d) == s) return d;
  }
  throw InvalidArgument("unknown defect shape '" + std::string(s) + "'");
}

/**
 * Parameters of a synthetic inspection dataset. Exactly
 * round(defect_rate * count) images carry one planted defect each; shapes
 * are assigned round-robin. Multi-class datasets label every image with its
 * defect shape (defect_rate is ignored).
 */
struct SynthSpec {
  std::string name = "synth";
  std::size_t count = 1000;
  double defect_rate = 0.1;
  int width = 64;
  int height = 64;
  std::vector<DefectShape> shapes = {DefectShape::Scratch, DefectShape::Bubble, DefectShape::Stamping};
  /// Standard deviation of per-pixel Gaussian noise.
  double noise = 0.02;
  bool multiclass = false;
  std::uint64_t seed = 0;

  void validate() const {
    if (count < 1) throw InvalidArgument("synth: count must be >= 1");
    if (!(defect_rate >= 0.0 && defect_rate <= 1.0)) throw InvalidArgument("synth: defect_rate must be in [0, 1]");
    if (width < 24 || height < 24) throw InvalidArgument("synth: images must be at least 24x24");
    if (shapes.empty()) throw InvalidArgument("synth: at least one defect shape required");
    if (!(noise >= 0.0)) throw InvalidArgument("synth: noise must be >= 0");
    if (multiclass && shapes.size() < 3) throw InvalidArgument("synth: multi-class datasets need 3 shapes");
  }

  std::size_t defect_count() const {
    return multiclass ? count : static_cast<std::size_t>(std::lround(defect_rate * static_cast<double>(count)));
  }
};

inline void to_json(json& j, const SynthSpec& s) {
  std::vector<std::string> shapes;
  for (auto d : s.shapes) shapes.emplace_back(to_string(d));
  j = json{{"name", s.name},   {"count", s.count}, {"defect_rate", s.defect_rate}, {"width", s.width},
           {"height", s.height}, {"shapes", shapes}, {"noise", s.noise},             {"multiclass", s.multiclass},
           {"seed", s.seed}};
}

/// Missing keys keep their defaults.
inline void from_json(const json& j, SynthSpec& s) {
  try {
    s.name = j.value("name", s.name);
    s.count = j.value("count", s.count);
    s.defect_rate = j.value("defect_rate", s.defect_rate);
    s.width = j.value("width", s.width);
    s.height = j.value("height", s.height);
    if (j.contains("shapes")) {
      s.shapes.clear();
      for (const auto& v : j.at("shapes")) s.shapes.push_back(parse_defect_shape(v.get<std::string>()));
    }
    s.noise = j.value("noise", s.noise);
    s.multiclass = j.value("multiclass", s.multiclass);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed synth spec: ") + e.what());
  }
  s.validate();
}

struct GoldBox {
  BoundingBox box;
  DefectShape shape = DefectShape::Scratch;
};

struct SynthImage {
  std::string id;
  GrayImage image;
  std::string label;
  std::vector<GoldBox> boxes;
};

struct SynthDataset {
  SynthSpec spec;
  std::vector<std::string> classes;
  std::vector<SynthImage> images;

  bool binary() const { return !spec.multiclass; }

  std::size_t index_of(std::string_view id) const {
    for (std::size_t i = 0; i < images.size(); ++i) {
      if (images[i].id == id) return i;
    }
    throw NotFound("synthetic image '" + std::string(id) + "' does not exist");
  }

  /// Manifest over all images; gold labels included on request. Paths
  /// point at images/<id>.png.
  store::DatasetManifest manifest(bool with_labels) const {
    store::DatasetManifest m;
    m.name = spec.name;
    m.task_type = binary() ? store::TaskType::Binary : store::TaskType::MultiClass;
    m.classes = classes;
    for (const auto& im : images) {
      m.images.push_back({im.id, "images/" + im.id + ".png",
                          with_labels ? std::optional<std::string>(im.label) : std::nullopt});
    }
    return m;
  }
};

inline constexpr const char* kNormalClass = "ok";
inline constexpr const char* kDefectClass = "defect";

namespace detail {

constexpr const char* kGlyph[] = {
    "#########", "#.......#", "#.#####.#", "#...#...#", "#...#...#",
    "#...#...#", "#...#...#", "#.......#", "#########",
};
constexpr int kGlyphSide = 9;

/// Pixel overrides of one defect; NaN means untouched.
struct Overlay {
  int width;
  int height;
  std::vector<double> v;

  Overlay(int w, int h) : width(w), height(h), v(static_cast<std::size_t>(w) * h, std::nan("")) {}
  void set(int x, int y, double value) {
    if (x >= 0 && y >= 0 && x < width && y < height) v[static_cast<std::size_t>(y) * width + x] = value;
  }
};

inline void draw_scratch(Overlay& o, Rng& rng) {
  const int margin = 4;
  double x = rng.uniform(margin, o.width - margin), y = rng.uniform(margin, o.height - margin);
  double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const int length = 10 + static_cast<int>(rng.index(13));
  const bool thick = rng.uniform() < 0.5;
  const double value = 0.1 + 0.05 * rng.uniform();
  for (int s = 0; s < length; ++s) {
    const int px = static_cast<int>(std::lround(x)), py = static_cast<int>(std::lround(y));
    o.set(px, py, value);
    if (thick) o.set(px + (std::abs(std::sin(theta)) > 0.7 ? 1 : 0), py + (std::abs(std::sin(theta)) > 0.7 ? 0 : 1), value);
    const double nx = x + std::cos(theta), ny = y + std::sin(theta);
    if (nx < 1 || ny < 1 || nx > o.width - 2 || ny > o.height - 2) break;
    x = nx;
    y = ny;
    theta += rng.uniform(-0.25, 0.25);
  }
}

inline void draw_bubble(Overlay& o, Rng& rng) {
  const double r = rng.uniform(3.0, 6.0);
  const int m = static_cast<int>(std::ceil(r)) + 1;
  const double cx = rng.uniform(m, o.width - m), cy = rng.uniform(m, o.height - m);
  for (int y = static_cast<int>(cy - r) - 1; y <= static_cast<int>(cy + r) + 1; ++y) {
    for (int x = static_cast<int>(cx - r) - 1; x <= static_cast<int>(cx + r) + 1; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (d <= r - 1.0) {
        o.set(x, y, 0.9);
      } else if (d <= r) {
        o.set(x, y, 0.2);
      }
    }
  }
}

inline void draw_stamping(Overlay& o, Rng& rng) {
  const int x0 = o.width * 3 / 4 - kGlyphSide / 2 + static_cast<int>(rng.index(3)) - 1;
  const int y0 = o.height / 4 - kGlyphSide / 2 + static_cast<int>(rng.index(3)) - 1;
  const double value = 0.12 + 0.06 * rng.uniform();
  for (int y = 0; y < kGlyphSide; ++y) {
    for (int x = 0; x < kGlyphSide; ++x) {
      if (kGlyph[y][x] == '#') o.set(x0 + x, y0 + y, value);
    }
  }
}

inline std::vector<double> background(int w, int h, double noise, Rng& rng) {
  const GrayImage grid = GrayImage::clamped(5, 5, [&] {
    std::vector<double> g(25);
    for (double& v : g) v = rng.uniform();
    return g;
  }());
  const GrayImage smooth = resize_bilinear(grid, w, h);
  std::vector<double> out(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 0.5 + 0.16 * (smooth.pixels()[i] - 0.5) + (noise > 0 ? noise * rng.normal() : 0.0);
  }
  return out;
}

inline double snap8(double v) { return std::round(std::clamp(v, 0.0, 1.0) * kImageLevels) / kImageLevels; }

}  // namespace detail

/**
 * Renders the dataset in memory. Backgrounds are a smooth mid-gray field
 * plus Gaussian noise; scratches are dark random-walk strokes, bubbles are
 * bright discs with a dark rim, stampings are a fixed glyph at a fixed spot
 * (+/-1 px). Intensities sit on the 8-bit grid, and each gold box is the
 * exact bounding box of the pixels the defect changed.
 */
inline SynthDataset synth_dataset(const SynthSpec& spec) {
  spec.validate();
  SynthDataset ds;
  ds.spec = spec;
  if (spec.multiclass) {
    for (auto s : spec.shapes) ds.classes.emplace_back(to_string(s));
  } else {
    ds.classes = {kNormalClass, kDefectClass};
  }
  const Rng root(spec.seed);
  std::vector<std::size_t> order(spec.count);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng pick = root.child(0);
  pick.shuffle(std::span<std::size_t>(order));
  std::vector<std::optional<DefectShape>> planted(spec.count);
  const std::size_t n_def = spec.defect_count();
  for (std::size_t k = 0; k < n_def; ++k) planted[order[k]] = spec.shapes[k % spec.shapes.size()];

  const int w = spec.width, h = spec.height;
  for (std::size_t i = 0; i < spec.count; ++i) {
    Rng rng = root.child(i + 1);
    char id[32];
    std::snprintf(id, sizeof id, "img%05zu", i);
    SynthImage im;
    im.id = id;
    std::vector<double> px = detail::background(w, h, spec.noise, rng);
    for (double& v : px) v = detail::snap8(v);
    im.label = kNormalClass;
    if (planted[i]) {
      const DefectShape shape = *planted[i];
      detail::Overlay o(w, h);
      switch (shape) {
        case DefectShape::Scratch: detail::draw_scratch(o, rng); break;
        case DefectShape::Bubble: detail::draw_bubble(o, rng); break;
        case DefectShape::Stamping: detail::draw_stamping(o, rng); break;
      }
      int x0 = w, y0 = h, x1 = 0, y1 = 0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          const std::size_t k = static_cast<std::size_t>(y) * w + x;
          if (std::isnan(o.v[k])) continue;
          const double nv = detail::snap8(o.v[k]);
          if (nv == px[k]) continue;
          px[k] = nv;
          x0 = std::min(x0, x);
          y0 = std::min(y0, y);
          x1 = std::max(x1, x + 1);
          y1 = std::max(y1, y + 1);
        }
      }
      const std::string cls = spec.multiclass ? std::string(to_string(shape)) : kDefectClass;
      if (x1 > x0) im.boxes.push_back({BoundingBox{x0, y0, x1, y1, "gold", im.id, cls}, shape});
      im.label = cls;
    }
    im.image = GrayImage(w, h, std::move(px));
    ds.images.push_back(std::move(im));
  }
  return ds;
}

inline json gold_boxes_to_json(const SynthDataset& ds) {
  json out = json::array();
  for (const auto& im : ds.images) {
    for (const auto& g : im.boxes) {
      out.push_back(json{{"image_id", im.id}, {"x0", g.box.x0}, {"y0", g.box.y0}, {"x1", g.box.x1}, {"y1", g.box.y1},
                         {"class", g.box.defect_class}, {"shape", std::string(to_string(g.shape))}});
    }
  }
  return out;
}

inline constexpr const char* kGoldBoxesFile = "gold_boxes.json";

/// images/<id>.png (8-bit), manifest.json with gold labels, gold_boxes.json
/// and the spec as spec.json.
inline store::DatasetManifest write_synth(const SynthDataset& ds, const std::filesystem::path& dir) {
  store::DatasetManifest m = ds.manifest(true);
  m.base_dir = dir;
  for (const auto& im : ds.images) store::write_png(dir / "images" / (im.id + ".png"), im.image, 8);
  store::save_manifest(m, dir / "manifest.json");
  store::write_json_file(dir / kGoldBoxesFile, gold_boxes_to_json(ds));
  store::write_json_file(dir / "spec.json", json(ds.spec));
  return m;
}

/// Reads gold boxes written by write_synth, keyed by image id.
inline std::map<std::string, std::vector<BoundingBox>> read_gold_boxes(const std::filesystem::path& path) {
  std::map<std::string, std::vector<BoundingBox>> out;
  try {
    for (const auto& e : store::read_json_file(path)) {
      BoundingBox b{e.at("x0").get<int>(), e.at("y0").get<int>(), e.at("x1").get<int>(), e.at("y1").get<int>(),
                    "gold",             e.at("image_id").get<std::string>(), e.at("class").get<std::string>()};
      out[b.image_id].push_back(std::move(b));
    }
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": malformed gold boxes: " + e.what());
  }
  return out;
}

}  // namespace gadget::eval

#endif  // GADGET_EVAL_SYNTH_HPP
