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

#ifndef GADGET_STORE_MANIFEST_HPP
#define GADGET_STORE_MANIFEST_HPP

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gadget/core/json.hpp"
#include "gadget/core/types.hpp"
#include "gadget/store/png_io.hpp"
#include "gadget/store/fs.hpp"

namespace gadget::store {

enum class TaskType { Binary, MultiClass };

/// Ids end up in file names and CSV cells: [A-Za-z0-9._-]+.
inline bool is_safe_id(std::string_view id) {
  if (id.empty() || id == "." || id == "..") return false;
  return std::all_of(id.begin(), id.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '.' || c == '_' || c == '-';
  });
}

inline void require_safe_id(std::string_view id, std::string_view what) {
  if (!is_safe_id(id)) {
    throw InvalidArgument(std::string(what) + " id '" + std::string(id) +
                          "' must match [A-Za-z0-9._-]+");
  }
}

struct ImageRecord {
  std::string id;
  std::string path;
  std::optional<std::string> label;

  bool operator==(const ImageRecord&) const = default;
};

/**
 * A dataset: image records with optional gold labels. For binary tasks the
 * first class is the non-defect class; multi-class tasks have none.
 */
struct DatasetManifest {
  std::string name;
  TaskType task_type = TaskType::Binary;
  std::vector<std::string> classes;
  std::vector<ImageRecord> images;
  /// Directory image paths are relative to.
  std::filesystem::path base_dir;

  std::size_t total() const noexcept { return images.size(); }

  std::optional<std::string> normal_class() const {
    if (task_type == TaskType::Binary && !classes.empty()) return classes.front();
    return std::nullopt;
  }

  bool is_defect_label(std::string_view label) const {
    const auto normal = normal_class();
    return !normal || label != *normal;
  }

  /// N^D: gold-labeled images carrying a defect class.
  std::size_t defective() const {
    return static_cast<std::size_t>(std::count_if(images.begin(), images.end(), [&](const auto& r) {
      return r.label && is_defect_label(*r.label);
    }));
  }

  const ImageRecord& find(std::string_view id) const {
    for (const auto& r : images) {
      if (r.id == id) return r;
    }
    throw NotFound("image id '" + std::string(id) + "' not in manifest '" + name + "'");
  }

  std::size_t class_index(std::string_view label) const {
    const auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw InvalidArgument("label '" + std::string(label) + "' not in class set");
    return static_cast<std::size_t>(it - classes.begin());
  }

  void validate() const {
    if (images.empty()) throw InvalidArgument("manifest '" + name + "' has no images");
    if (task_type == TaskType::Binary && classes.size() != 2) {
      throw InvalidArgument("binary manifest needs exactly 2 classes, got " +
                            std::to_string(classes.size()));
    }
    if (task_type == TaskType::MultiClass && classes.size() < 3) {
      throw InvalidArgument("multiclass manifest needs at least 3 classes, got " +
                            std::to_string(classes.size()));
    }
    std::set<std::string_view> class_seen;
    for (const auto& c : classes) {
      require_safe_id(c, "class");
      if (!class_seen.insert(c).second) throw InvalidArgument("duplicate class '" + c + "'");
    }
    std::set<std::string_view> seen;
    for (const auto& r : images) {
      require_safe_id(r.id, "image");
      if (!seen.insert(r.id).second) throw InvalidArgument("duplicate image id '" + r.id + "'");
      if (r.label && !class_seen.contains(*r.label)) {
        throw InvalidArgument("image '" + r.id + "' has label '" + *r.label +
                              "' outside the class set");
      }
    }
  }

  /// Development set built from every gold-labeled record, in manifest order.
  DevelopmentSet development_set() const {
    DevelopmentSet dev(classes, normal_class());
    for (const auto& r : images) {
      if (r.label) dev.add({r.id, *r.label});
    }
    return dev;
  }
};

inline std::string_view to_string(TaskType t) {
  return t == TaskType::Binary ? "binary" : "multiclass";
}

inline TaskType parse_task_type(std::string_view s) {
  if (s == "binary") return TaskType::Binary;
  if (s == "multiclass") return TaskType::MultiClass;
  throw InvalidArgument("task_type must be 'binary' or 'multiclass', got '" + std::string(s) + "'");
}

inline DatasetManifest parse_manifest(const json& j, std::filesystem::path base_dir) {
  DatasetManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.task_type = parse_task_type(j.at("task_type").get<std::string>());
    m.classes = j.at("classes").get<std::vector<std::string>>();
    for (const auto& r : j.at("images")) {
      ImageRecord rec{r.at("id").get<std::string>(), r.at("path").get<std::string>(), std::nullopt};
      if (r.contains("label") && !r.at("label").is_null()) rec.label = r.at("label").get<std::string>();
      m.images.push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("malformed manifest: ") + e.what());
  }
  m.base_dir = std::move(base_dir);
  m.validate();
  return m;
}

inline json manifest_to_json(const DatasetManifest& m) {
  json images = json::array();
  for (const auto& r : m.images) {
    images.push_back(json{{"id", r.id}, {"path", r.path},
                          {"label", r.label ? json(*r.label) : json(nullptr)}});
  }
  return json{{"name", m.name}, {"task_type", std::string(to_string(m.task_type))},
              {"classes", m.classes}, {"images", std::move(images)}};
}

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

/// Pretty-printed with a trailing newline; keys are sorted, so output is byte-stable.
inline void write_json_file(const std::filesystem::path& path, const json& j) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
}

inline DatasetManifest load_manifest(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("manifest '" + path.string() + "' does not exist");
  return parse_manifest(read_json_file(path), path.parent_path());
}

/**
 * Writes the manifest to `path`, rewriting image paths so they stay valid
 * relative to the new location.
 */
inline void save_manifest(const DatasetManifest& m, const std::filesystem::path& path) {
  DatasetManifest copy = m;
  const auto target_dir = std::filesystem::absolute(path).parent_path();
  for (auto& r : copy.images) {
    const auto abs = std::filesystem::absolute(m.base_dir / r.path).lexically_normal();
    r.path = abs.lexically_relative(target_dir).generic_string();
  }
  write_json_file(path, manifest_to_json(copy));
}

inline GrayImage load_image(const DatasetManifest& m, std::string_view image_id) {
  const auto& rec = m.find(image_id);
  return read_png(m.base_dir / rec.path);
}

}  // namespace gadget::store

#endif  // GADGET_STORE_MANIFEST_HPP
