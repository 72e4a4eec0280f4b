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

#ifndef GADGET_EVAL_ERROR_TAGS_HPP
#define GADGET_EVAL_ERROR_TAGS_HPP

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gadget/core/types.hpp"
#include "gadget/eval/metrics.hpp"
#include "gadget/store/csv.hpp"

namespace gadget::eval {

enum class ErrorCategory { MatchingFailure, Unresolved };

inline std::string_view to_string(ErrorCategory c) {
  return c == ErrorCategory::MatchingFailure ? "matching_failure" : "unresolved";
}

struct TaggedError {
  std::string image_id;
  std::string gold;
  std::string predicted;
  double max_similarity = 0.0;
  ErrorCategory category = ErrorCategory::Unresolved;
};

struct ErrorTags {
  double threshold = 0.0;
  std::vector<TaggedError> errors;

  std::size_t count(ErrorCategory c) const {
    return static_cast<std::size_t>(
        std::count_if(errors.begin(), errors.end(), [c](const TaggedError& e) { return e.category == c; }));
  }
  std::size_t total() const noexcept { return errors.size(); }
};

/**
 * Splits misclassified images into categories. A misclassified image with
 * gold boxes whose best pattern similarity is below `threshold` is a
 * matching failure: no pattern fired on it any better than on defect-free
 * images. Every other error is left unresolved for manual review. Without
 * an explicit threshold the highest best-similarity over images without
 * gold boxes is used.
 */
inline ErrorTags tag_errors(const LabelMap& gold, const LabelMap& predicted,
                            const std::map<std::string, std::vector<BoundingBox>>& gold_boxes,
                            std::span<const FeatureVector> features, std::optional<double> threshold = std::nullopt) {
  if (gold.size() != predicted.size()) throw InvalidArgument("tag_errors: gold and predicted cover different ids");
  std::map<std::string, double> best;
  for (const auto& f : features) {
    best[f.image_id] = f.values.empty() ? 0.0 : *std::max_element(f.values.begin(), f.values.end());
  }
  auto has_boxes = [&](const std::string& id) {
    const auto it = gold_boxes.find(id);
    return it != gold_boxes.end() && !it->second.empty();
  };
  auto best_of = [&](const std::string& id) {
    const auto it = best.find(id);
    if (it == best.end()) throw InvalidArgument("tag_errors: no feature row for image '" + id + "'");
    return it->second;
  };

  ErrorTags out;
  if (threshold) {
    out.threshold = *threshold;
  } else {
    std::optional<double> highest;
    for (const auto& [id, label] : gold) {
      if (!has_boxes(id)) highest = std::max(highest.value_or(0.0), best_of(id));
    }
    if (!highest) throw InvalidArgument("tag_errors: no defect-free image to derive a threshold from");
    out.threshold = *highest;
  }
  for (const auto& [id, g] : gold) {
    const auto it = predicted.find(id);
    if (it == predicted.end()) throw InvalidArgument("tag_errors: no prediction for image '" + id + "'");
    if (it->second == g) continue;
    TaggedError e{id, g, it->second, best_of(id), ErrorCategory::Unresolved};
    if (has_boxes(id) && e.max_similarity < out.threshold) e.category = ErrorCategory::MatchingFailure;
    out.errors.push_back(std::move(e));
  }
  return out;
}

inline std::string error_tags_to_csv(const ErrorTags& t) {
  std::ostringstream os;
  os << "image_id,gold,predicted,max_similarity,category\n";
  for (const auto& e : t.errors) {
    os << e.image_id << ',' << e.gold << ',' << e.predicted << ',' << store::format_double(e.max_similarity) << ','
       << to_string(e.category) << '\n';
  }
  return os.str();
}

}  // namespace gadget::eval

#endif  // GADGET_EVAL_ERROR_TAGS_HPP
