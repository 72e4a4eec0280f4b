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

#ifndef GADGET_STORE_PATTERN_STORE_HPP
#define GADGET_STORE_PATTERN_STORE_HPP

#include <filesystem>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gadget/core/json.hpp"
#include "gadget/core/resample.hpp"
#include "gadget/core/types.hpp"
#include "gadget/store/manifest.hpp"
#include "gadget/store/png_io.hpp"

namespace gadget::store {

inline constexpr const char* kPatternIndexFile = "patterns.json";

/**
 * Writes `patterns` to `dir` as one 16-bit gray PNG per pattern plus the
 * patterns.json index, replacing any previous index. The index order is the
 * feature column order. Pixels are stored on a 1/65535 grid, so patterns
 * already on that grid (all crops of 8-bit images, all augmenter output)
 * round-trip exactly. Single writer per directory.
 */
inline std::vector<std::string> persist_patterns(const std::filesystem::path& dir,
                                                 std::span<const Pattern> patterns) {
  std::set<std::string_view> seen;
  for (const auto& p : patterns) {
    require_safe_id(p.id, "pattern");
    if (!seen.insert(p.id).second) throw InvalidArgument("duplicate pattern id '" + p.id + "'");
    if (p.original_size.width < 1 || p.original_size.height < 1) {
      throw InvalidArgument("pattern '" + p.id + "' has zero-area original size");
    }
    if (p.defect_class.empty()) throw InvalidArgument("pattern '" + p.id + "' has no class");
  }
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir.string() + "': " + ec.message());

  json index = json::array();
  std::vector<std::string> ids;
  for (const auto& p : patterns) {
    const std::string file = p.id + ".png";
    write_png(dir / file, p.pixels, 16);
    json entry{{"id", p.id},
               {"file", file},
               {"class", p.defect_class},
               {"provenance", std::string(to_string(p.provenance))},
               {"original_size", p.original_size}};
    if (!p.source_image_id.empty()) entry["source"] = p.source_image_id;
    index.push_back(std::move(entry));
    ids.push_back(p.id);
  }
  const auto tmp = dir / (std::string(kPatternIndexFile) + ".tmp");
  write_json_file(tmp, json{{"patterns", std::move(index)}});
  std::filesystem::rename(tmp, dir / kPatternIndexFile, ec);
  if (ec) throw IoError("cannot finalize pattern index: " + ec.message());
  return ids;
}

/// Patterns in index order; a directory without an index is an empty store.
inline std::vector<Pattern> load_patterns(const std::filesystem::path& dir) {
  const auto index_path = dir / kPatternIndexFile;
  if (!std::filesystem::exists(index_path)) return {};
  const json index = read_json_file(index_path);
  std::vector<Pattern> out;
  try {
    for (const auto& e : index.at("patterns")) {
      Pattern p{e.at("id").get<std::string>(),
                read_png(dir / e.at("file").get<std::string>()),
                e.at("original_size").get<Size>(),
                parse_provenance(e.at("provenance").get<std::string>()),
                e.at("class").get<std::string>(),
                e.value("source", std::string{})};
      out.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw IoError(index_path.string() + ": malformed pattern index: " + e.what());
  }
  return out;
}

}  // namespace gadget::store

#endif  // GADGET_STORE_PATTERN_STORE_HPP
