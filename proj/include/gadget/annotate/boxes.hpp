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

#ifndef GADGET_ANNOTATE_BOXES_HPP
#define GADGET_ANNOTATE_BOXES_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "gadget/core/error.hpp"
#include "gadget/core/types.hpp"

namespace gadget::annotate {

enum class CombineStrategy { Average, Union, Intersection };

inline std::string_view to_string(CombineStrategy s) {
  switch (s) {
    case CombineStrategy::Average: return "average";
    case CombineStrategy::Union: return "union";
    case CombineStrategy::Intersection: return "intersection";
  }
  return "average";
}

inline CombineStrategy parse_strategy(std::string_view s) {
  if (s == "average") return CombineStrategy::Average;
  if (s == "union") return CombineStrategy::Union;
  if (s == "intersection") return CombineStrategy::Intersection;
  throw InvalidArgument("unknown combine strategy '" + std::string(s) + "'");
}

inline long long intersection_area(const BoundingBox& a, const BoundingBox& b) {
  const int w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const int h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  return w > 0 && h > 0 ? static_cast<long long>(w) * h : 0;
}

inline double iou(const BoundingBox& a, const BoundingBox& b) {
  const long long inter = intersection_area(a, b);
  const long long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

/// Total order used to make outputs independent of input order.
inline bool box_less(const BoundingBox& a, const BoundingBox& b) {
  return std::tie(a.y0, a.x0, a.y1, a.x1, a.defect_class, a.worker_id, a.image_id) <
         std::tie(b.y0, b.x0, b.y1, b.x1, b.defect_class, b.worker_id, b.image_id);
}

/**
 * Connected components of the graph with an edge wherever IoU >= threshold.
 * Each cluster lists box indices in canonical box order; clusters are
 * ordered by their first box.
 */
inline std::vector<std::vector<std::size_t>> cluster_boxes(std::span<const BoundingBox> boxes, double threshold) {
  std::vector<std::size_t> parent(boxes.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      if (iou(boxes[i], boxes[j]) >= threshold) parent[find(i)] = find(j);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < boxes.size(); ++i) groups[find(i)].push_back(i);
  std::vector<std::vector<std::size_t>> out;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return box_less(boxes[a], boxes[b]); });
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end(), [&](const auto& a, const auto& b) { return box_less(boxes[a[0]], boxes[b[0]]); });
  return out;
}

struct CombineResult {
  std::vector<BoundingBox> merged;
  std::vector<BoundingBox> outliers;
};

/// Most frequent class in the cluster; ties go to the lexicographically
/// smallest name.
inline std::string majority_class(std::span<const BoundingBox> boxes, std::span<const std::size_t> members) {
  std::map<std::string, int> counts;
  for (std::size_t i : members) ++counts[boxes[i].defect_class];
  std::string best;
  int best_n = -1;
  for (const auto& [cls, n] : counts) {
    if (n > best_n) {
      best = cls;
      best_n = n;
    }
  }
  return best;
}

/**
 * Clusters boxes of one image by IoU and merges each multi-box cluster with
 * `strategy`; single-box clusters are returned as outliers, as are the
 * members of an Intersection cluster without common area. Average rounds
 * the mean coordinates half away from zero. Both outputs are sorted
 * canonically.
 */
inline CombineResult combine_boxes(std::span<const BoundingBox> boxes, CombineStrategy strategy,
                                   double overlap_threshold = 0.3) {
  if (!(overlap_threshold > 0.0 && overlap_threshold <= 1.0)) {
    throw InvalidArgument("overlap threshold must be in (0, 1]");
  }
  CombineResult out;
  if (boxes.empty()) return out;
  for (const auto& b : boxes) {
    if (b.image_id != boxes.front().image_id) {
      throw InvalidArgument("combine_boxes: boxes reference images '" + boxes.front().image_id + "' and '" +
                            b.image_id + "'");
    }
    if (b.x1 <= b.x0 || b.y1 <= b.y0) throw InvalidArgument("combine_boxes: empty box");
  }
  for (const auto& members : cluster_boxes(boxes, overlap_threshold)) {
    if (members.size() == 1) {
      out.outliers.push_back(boxes[members[0]]);
      continue;
    }
    BoundingBox m;
    m.image_id = boxes.front().image_id;
    m.defect_class = majority_class(boxes, members);
    if (strategy == CombineStrategy::Average) {
      double s[4] = {0, 0, 0, 0};
      for (std::size_t i : members) {
        s[0] += boxes[i].x0;
        s[1] += boxes[i].y0;
        s[2] += boxes[i].x1;
        s[3] += boxes[i].y1;
      }
      const double n = static_cast<double>(members.size());
      m.x0 = static_cast<int>(std::lround(s[0] / n));
      m.y0 = static_cast<int>(std::lround(s[1] / n));
      m.x1 = static_cast<int>(std::lround(s[2] / n));
      m.y1 = static_cast<int>(std::lround(s[3] / n));
    } else {
      const bool uni = strategy == CombineStrategy::Union;
      m.x0 = boxes[members[0]].x0;
      m.y0 = boxes[members[0]].y0;
      m.x1 = boxes[members[0]].x1;
      m.y1 = boxes[members[0]].y1;
      for (std::size_t i : members) {
        const auto& b = boxes[i];
        m.x0 = uni ? std::min(m.x0, b.x0) : std::max(m.x0, b.x0);
        m.y0 = uni ? std::min(m.y0, b.y0) : std::max(m.y0, b.y0);
        m.x1 = uni ? std::max(m.x1, b.x1) : std::min(m.x1, b.x1);
        m.y1 = uni ? std::max(m.y1, b.y1) : std::min(m.y1, b.y1);
      }
      if (m.x1 <= m.x0 || m.y1 <= m.y0) {
        for (std::size_t i : members) out.outliers.push_back(boxes[i]);
        continue;
      }
    }
    out.merged.push_back(std::move(m));
  }
  std::sort(out.merged.begin(), out.merged.end(), box_less);
  std::sort(out.outliers.begin(), out.outliers.end(), box_less);
  return out;
}

}  // namespace gadget::annotate

#endif  // GADGET_ANNOTATE_BOXES_HPP
