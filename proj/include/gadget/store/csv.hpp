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

#ifndef GADGET_STORE_CSV_HPP
#define GADGET_STORE_CSV_HPP

#include <charconv>
#include <filesystem>
#include <fstream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "gadget/core/types.hpp"
#include "gadget/store/fs.hpp"

namespace gadget::store {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw InvalidArgument("not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

/// Rows of a header-first CSV; tolerates CRLF on input, always writes LF.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  bool first = true;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (first) {
      t.header = std::move(cells);
      first = false;
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                    std::to_string(t.header.size()) + " cells, got " + std::to_string(cells.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (first) throw IoError(path.string() + ": empty CSV");
  return t;
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

/// Feature matrix with its column (pattern id) order.
struct FeatureTable {
  std::vector<std::string> pattern_ids;
  std::vector<FeatureVector> rows;

  /// Header names are `p_<pattern id>`.
  std::vector<std::string> column_names() const {
    std::vector<std::string> out;
    out.reserve(pattern_ids.size());
    for (const auto& id : pattern_ids) out.push_back("p_" + id);
    return out;
  }
};

inline std::string features_to_csv(const FeatureTable& table) {
  std::ostringstream os;
  os << "image_id";
  for (const auto& id : table.pattern_ids) os << ",p_" << id;
  os << '\n';
  for (const auto& row : table.rows) {
    if (row.values.size() != table.pattern_ids.size()) {
      throw InvalidArgument("feature row '" + row.image_id + "' has " +
                            std::to_string(row.values.size()) + " values for " +
                            std::to_string(table.pattern_ids.size()) + " patterns");
    }
    os << row.image_id;
    for (double v : row.values) os << ',' << format_double(v);
    os << '\n';
  }
  return os.str();
}

inline void write_features_csv(const std::filesystem::path& path, const FeatureTable& table) {
  write_text_file(path, features_to_csv(table));
}

inline FeatureTable read_features_csv(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  if (csv.header.empty() || csv.header.front() != "image_id") {
    throw IoError(path.string() + ": feature CSV must start with an image_id column");
  }
  FeatureTable t;
  for (std::size_t c = 1; c < csv.header.size(); ++c) {
    const auto& name = csv.header[c];
    if (name.rfind("p_", 0) != 0) throw IoError(path.string() + ": bad feature column '" + name + "'");
    t.pattern_ids.push_back(name.substr(2));
  }
  for (const auto& r : csv.rows) {
    FeatureVector fv{r.front(), {}};
    fv.values.reserve(r.size() - 1);
    for (std::size_t c = 1; c < r.size(); ++c) fv.values.push_back(parse_double(r[c]));
    t.rows.push_back(std::move(fv));
  }
  return t;
}

struct LabelRow {
  std::string image_id;
  std::string label;

  bool operator==(const LabelRow&) const = default;
};

inline void write_labels_csv(const std::filesystem::path& path, std::span<const LabelRow> rows) {
  std::ostringstream os;
  os << "image_id,label\n";
  for (const auto& r : rows) os << r.image_id << ',' << r.label << '\n';
  write_text_file(path, os.str());
}

inline std::vector<LabelRow> read_labels_csv(const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  if (csv.header.size() != 2 || csv.header[0] != "image_id" || csv.header[1] != "label") {
    throw IoError(path.string() + ": label CSV header must be image_id,label");
  }
  std::vector<LabelRow> out;
  for (const auto& r : csv.rows) out.push_back({r[0], r[1]});
  return out;
}

inline std::string weak_labels_to_csv(std::span<const WeakLabel> labels,
                                      std::span<const std::string> classes) {
  std::ostringstream os;
  os << "image_id,predicted_class";
  for (const auto& c : classes) os << ",p_" << c;
  os << '\n';
  for (const auto& w : labels) {
    os << w.image_id << ',' << w.predicted_class;
    for (double p : w.probabilities) os << ',' << format_double(p);
    os << '\n';
  }
  return os.str();
}

inline void write_weak_labels_csv(const std::filesystem::path& path, std::span<const WeakLabel> labels,
                                  std::span<const std::string> classes) {
  write_text_file(path, weak_labels_to_csv(labels, classes));
}

/// Returns the class names from the header and the labels.
inline std::pair<std::vector<std::string>, std::vector<WeakLabel>> read_weak_labels_csv(
    const std::filesystem::path& path) {
  const CsvTable csv = read_csv(path);
  if (csv.header.size() < 3 || csv.header[0] != "image_id" || csv.header[1] != "predicted_class") {
    throw IoError(path.string() + ": weak-label CSV header must be image_id,predicted_class,p_...");
  }
  std::vector<std::string> classes;
  for (std::size_t c = 2; c < csv.header.size(); ++c) classes.push_back(csv.header[c].substr(2));
  std::vector<WeakLabel> out;
  for (const auto& r : csv.rows) {
    std::vector<double> probs;
    for (std::size_t c = 2; c < r.size(); ++c) probs.push_back(parse_double(r[c]));
    out.push_back(make_weak_label(r[0], classes, std::move(probs)));
  }
  return {std::move(classes), std::move(out)};
}

}  // namespace gadget::store

#endif  // GADGET_STORE_CSV_HPP
