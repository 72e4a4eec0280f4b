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

#ifndef GADGET_EVAL_CROWD_SIM_HPP
#define GADGET_EVAL_CROWD_SIM_HPP

#include <string>
#include <vector>

#include "gadget/annotate/session.hpp"
#include "gadget/eval/synth.hpp"

namespace gadget::eval {

enum class ReviewBehavior { Truthful, AcceptAll };

/// Simulated annotators: every gold box is redrawn with independent
/// integer jitter per coordinate, sometimes missed, sometimes joined by a
/// spurious box. Truthful reviewers accept a box iff it overlaps a gold box
/// with IoU >= review_iou.
struct CrowdConfig {
  int jitter = 3;
  double miss_rate = 0.05;
  double spurious_rate = 0.05;
  int workers = 3;
  int reviewers = 3;
  double review_iou = 0.3;
  ReviewBehavior review = ReviewBehavior::Truthful;
  /// Annotate every image instead of stopping at the defect threshold.
  bool annotate_all = false;
  std::uint64_t seed = 0;

  void validate() const {
    if (jitter < 0) throw InvalidArgument("crowd: jitter must be >= 0");
    if (!(miss_rate >= 0 && miss_rate <= 1) || !(spurious_rate >= 0 && spurious_rate <= 1)) {
      throw InvalidArgument("crowd: rates must be in [0, 1]");
    }
    if (workers < 1 || reviewers < 1) throw InvalidArgument("crowd: need at least one worker and reviewer");
  }
};

inline BoundingBox jitter_box(const BoundingBox& gold, int jitter, int width, int height, Rng& rng) {
  auto j = [&] { return static_cast<int>(rng.index(static_cast<std::size_t>(2 * jitter + 1))) - jitter; };
  BoundingBox b = gold;
  b.x0 = std::clamp(gold.x0 + j(), 0, width - 1);
  b.y0 = std::clamp(gold.y0 + j(), 0, height - 1);
  b.x1 = std::clamp(gold.x1 + j(), b.x0 + 1, width);
  b.y1 = std::clamp(gold.y1 + j(), b.y0 + 1, height);
  return b;
}

inline std::vector<BoundingBox> simulate_worker_boxes(const SynthImage& im, const std::vector<std::string>& defect_classes,
                                                      const std::string& worker, const CrowdConfig& cfg, Rng& rng) {
  const int w = im.image.width(), h = im.image.height();
  std::vector<BoundingBox> out;
  for (const auto& g : im.boxes) {
    if (rng.uniform() < cfg.miss_rate) continue;
    BoundingBox b = jitter_box(g.box, cfg.jitter, w, h, rng);
    b.worker_id = worker;
    out.push_back(std::move(b));
  }
  if (rng.uniform() < cfg.spurious_rate) {
    const int bw = 6 + static_cast<int>(rng.index(9)), bh = 6 + static_cast<int>(rng.index(9));
    const int x0 = static_cast<int>(rng.index(static_cast<std::size_t>(w - bw))), y0 = static_cast<int>(rng.index(static_cast<std::size_t>(h - bh)));
    out.push_back({x0, y0, x0 + bw, y0 + bh, worker, im.id, defect_classes[rng.index(defect_classes.size())]});
  }
  return out;
}

inline annotate::Vote simulated_vote(const SynthImage& im, const BoundingBox& box, const CrowdConfig& cfg) {
  if (cfg.review == ReviewBehavior::AcceptAll) return annotate::Vote::Accept;
  for (const auto& g : im.boxes) {
    if (annotate::iou(g.box, box) >= cfg.review_iou) return annotate::Vote::Accept;
  }
  return annotate::Vote::Reject;
}

struct CrowdOutcome {
  std::vector<Pattern> patterns;
  DevelopmentSet dev{{}, std::nullopt};
  std::size_t tasks = 0;
  std::size_t review_items = 0;
};

/**
 * Drives an in-memory annotation session with simulated workers until the
 * development set holds `session.defect_threshold` defective images.
 */
inline CrowdOutcome simulate_crowd(const SynthDataset& ds, annotate::SessionConfig session, const CrowdConfig& cfg) {
  cfg.validate();
  session.workers_per_task = cfg.workers;
  session.out_dir.clear();
  if (cfg.annotate_all) session.defect_threshold = ds.images.size() + 1;
  annotate::AnnotationSession s(ds.manifest(false), session);
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    s.provide_image(ds.images[i].id, ds.images[i].image);
    index.emplace(ds.images[i].id, i);
  }
  const Rng root(cfg.seed);
  std::uint64_t submission = 0;
  std::size_t reviews = 0;
  bool exhausted = false;
  while (!s.done()) {
    bool progressed = false;
    for (int w = 0; w < cfg.workers && !exhausted; ++w) {
      const std::string worker = "w" + std::to_string(w + 1);
      annotate::NextTask nt;
      try {
        nt = s.next_task(worker);
      } catch (const annotate::ExhaustedPool&) {
        if (!cfg.annotate_all) throw;
        exhausted = true;
        break;
      }
      if (nt.kind != annotate::NextTask::Kind::Task) continue;
      Rng rng = root.child(++submission);
      const SynthImage& im = ds.images[index.at(nt.image_id)];
      s.submit_boxes(nt.task_id, worker, simulate_worker_boxes(im, s.defect_classes(), worker, cfg, rng));
      progressed = true;
    }
    for (int r = 0; r < cfg.reviewers; ++r) {
      const std::string reviewer = "r" + std::to_string(r + 1);
      while (auto item = s.next_review(reviewer)) {
        const SynthImage& im = ds.images[index.at(item->box.image_id)];
        s.vote(item->item_id, reviewer, simulated_vote(im, item->box, cfg));
        ++reviews;
        progressed = true;
      }
    }
    if (!progressed && exhausted) break;
    if (!progressed && !s.done()) throw Error("crowd simulation stalled");
  }
  CrowdOutcome out;
  out.patterns = s.patterns();
  out.dev = s.dev_set();
  out.tasks = s.tasks().size();
  out.review_items = reviews;
  return out;
}

}  // namespace gadget::eval

#endif  // GADGET_EVAL_CROWD_SIM_HPP
