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

#ifndef GADGET_ANNOTATE_REVIEW_HPP
#define GADGET_ANNOTATE_REVIEW_HPP

#include <algorithm>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gadget/core/error.hpp"
#include "gadget/core/types.hpp"

namespace gadget::annotate {

enum class Vote { Accept, Reject };
enum class Resolution { Pending, Accepted, Rejected };

inline std::string_view to_string(Vote v) { return v == Vote::Accept ? "accept" : "reject"; }

inline Vote parse_vote(std::string_view s) {
  if (s == "accept") return Vote::Accept;
  if (s == "reject") return Vote::Reject;
  throw InvalidArgument("vote must be \"accept\" or \"reject\", got '" + std::string(s) + "'");
}

inline std::string_view to_string(Resolution r) {
  switch (r) {
    case Resolution::Pending: return "pending";
    case Resolution::Accepted: return "accepted";
    case Resolution::Rejected: return "rejected";
  }
  return "pending";
}

/// An outlier box awaiting peer review.
struct ReviewItem {
  std::string item_id;
  std::string task_id;
  BoundingBox box;
  std::vector<std::pair<std::string, Vote>> votes;
  Resolution resolution = Resolution::Pending;

  bool has_voted(std::string_view worker) const {
    return std::any_of(votes.begin(), votes.end(), [&](const auto& v) { return v.first == worker; });
  }

  bool operator==(const ReviewItem&) const = default;
};

/**
 * Records one vote. Once at least `quorum` votes are in, a strict majority
 * resolves the item; an even split stays pending until a later vote breaks
 * it.
 */
inline ReviewItem submit_review_vote(ReviewItem item, const std::string& worker_id, Vote vote, int quorum = 3) {
  if (quorum < 1) throw InvalidArgument("review quorum must be >= 1");
  if (worker_id.empty()) throw InvalidArgument("worker id is required");
  if (item.resolution != Resolution::Pending) {
    throw Conflict("review item '" + item.item_id + "' is already " + std::string(to_string(item.resolution)));
  }
  if (item.has_voted(worker_id)) {
    throw Conflict("worker '" + worker_id + "' already voted on review item '" + item.item_id + "'");
  }
  item.votes.emplace_back(worker_id, vote);
  if (static_cast<int>(item.votes.size()) >= quorum) {
    const auto accepts = std::count_if(item.votes.begin(), item.votes.end(),
                                       [](const auto& v) { return v.second == Vote::Accept; });
    const auto rejects = static_cast<long>(item.votes.size()) - accepts;
    if (accepts > rejects) item.resolution = Resolution::Accepted;
    if (rejects > accepts) item.resolution = Resolution::Rejected;
  }
  return item;
}

}  // namespace gadget::annotate

#endif  // GADGET_ANNOTATE_REVIEW_HPP
