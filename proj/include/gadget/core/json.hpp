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

#ifndef GADGET_CORE_JSON_HPP
#define GADGET_CORE_JSON_HPP

// nlohmann::json bindings for the domain types.

#include <json.hpp>

#include "gadget/core/types.hpp"

namespace gadget {

using json = nlohmann::json;

inline void to_json(json& j, const Size& s) { j = json::array({s.width, s.height}); }
inline void from_json(const json& j, Size& s) {
  if (!j.is_array() || j.size() != 2) throw InvalidArgument("size must be [w, h]");
  s.width = j.at(0).get<int>();
  s.height = j.at(1).get<int>();
}

inline void to_json(json& j, const BoundingBox& b) {
  j = json{{"x0", b.x0}, {"y0", b.y0}, {"x1", b.x1}, {"y1", b.y1}, {"worker_id", b.worker_id},
           {"image_id", b.image_id}, {"class", b.defect_class}};
}
inline void from_json(const json& j, BoundingBox& b) {
  b.x0 = j.at("x0").get<int>();
  b.y0 = j.at("y0").get<int>();
  b.x1 = j.at("x1").get<int>();
  b.y1 = j.at("y1").get<int>();
  b.worker_id = j.value("worker_id", std::string{});
  b.image_id = j.value("image_id", std::string{});
  b.defect_class = j.value("class", std::string{});
}

inline void to_json(json& j, const DevEntry& e) {
  j = json{{"image_id", e.image_id}, {"label", e.gold_label}};
}
inline void from_json(const json& j, DevEntry& e) {
  e.image_id = j.at("image_id").get<std::string>();
  e.gold_label = j.at("label").get<std::string>();
}

inline void to_json(json& j, const DevelopmentSet& d) {
  j = json{{"classes", d.class_set()}, {"entries", d.entries()}};
  j["normal_class"] = d.normal_class() ? json(*d.normal_class()) : json(nullptr);
}
inline void from_json(const json& j, DevelopmentSet& d) {
  std::optional<std::string> normal;
  if (j.contains("normal_class") && !j.at("normal_class").is_null()) {
    normal = j.at("normal_class").get<std::string>();
  }
  DevelopmentSet out(j.at("classes").get<std::vector<std::string>>(), normal);
  for (const auto& e : j.at("entries")) out.add(e.get<DevEntry>());
  d = std::move(out);
}

inline void to_json(json& j, const FeatureVector& f) {
  j = json{{"image_id", f.image_id}, {"values", f.values}};
}
inline void from_json(const json& j, FeatureVector& f) {
  f.image_id = j.at("image_id").get<std::string>();
  f.values = j.at("values").get<std::vector<double>>();
}

inline void to_json(json& j, const WeakLabel& w) {
  j = json{{"image_id", w.image_id},
           {"predicted_index", w.predicted_index},
           {"predicted_class", w.predicted_class},
           {"probabilities", w.probabilities}};
}
inline void from_json(const json& j, WeakLabel& w) {
  w.image_id = j.at("image_id").get<std::string>();
  w.predicted_index = j.at("predicted_index").get<std::size_t>();
  w.predicted_class = j.at("predicted_class").get<std::string>();
  w.probabilities = j.at("probabilities").get<std::vector<double>>();
}

}  // namespace gadget

namespace nlohmann {

template <>
struct adl_serializer<gadget::GrayImage> {
  static void to_json(json& j, const gadget::GrayImage& img) {
    j = json{{"width", img.width()},
             {"height", img.height()},
             {"data", std::vector<double>(img.pixels().begin(), img.pixels().end())}};
  }
  static gadget::GrayImage from_json(const json& j) {
    return gadget::GrayImage(j.at("width").get<int>(), j.at("height").get<int>(),
                             j.at("data").get<std::vector<double>>());
  }
};

template <>
struct adl_serializer<gadget::Pattern> {
  static void to_json(json& j, const gadget::Pattern& p) {
    j = json{{"id", p.id},
             {"pixels", p.pixels},
             {"original_size", p.original_size},
             {"provenance", std::string(gadget::to_string(p.provenance))},
             {"class", p.defect_class},
             {"source", p.source_image_id}};
  }
  static gadget::Pattern from_json(const json& j) {
    return gadget::Pattern{j.at("id").get<std::string>(),
                           j.at("pixels").get<gadget::GrayImage>(),
                           j.at("original_size").get<gadget::Size>(),
                           gadget::parse_provenance(j.at("provenance").get<std::string>()),
                           j.at("class").get<std::string>(),
                           j.value("source", std::string{})};
  }
};

}  // namespace nlohmann

#endif  // GADGET_CORE_JSON_HPP
