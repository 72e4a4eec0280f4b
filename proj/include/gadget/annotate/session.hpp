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

#ifndef GADGET_ANNOTATE_SESSION_HPP
#define GADGET_ANNOTATE_SESSION_HPP

#include <cstdio>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gadget/annotate/boxes.hpp"
#include "gadget/annotate/review.hpp"
#include "gadget/annotate/sampling.hpp"
#include "gadget/core/log.hpp"
#include "gadget/core/rng.hpp"
#include "gadget/core/types.hpp"
#include "gadget/store/csv.hpp"
#include "gadget/store/manifest.hpp"
#include "gadget/store/pattern_store.hpp"

namespace gadget::annotate {

enum class TaskState { Open, Annotated, InReview, Finalized };

inline std::string_view to_string(TaskState s) {
  switch (s) {
    case TaskState::Open: return "open";
    case TaskState::Annotated: return "annotated";
    case TaskState::InReview: return "in_review";
    case TaskState::Finalized: return "finalized";
  }
  return "open";
}

struct AnnotationTask {
  std::string task_id;
  std::string image_id;
  TaskState state = TaskState::Open;
  /// Submitted boxes per worker, in submission order.
  std::vector<std::pair<std::string, std::vector<BoundingBox>>> submissions;
  std::vector<BoundingBox> merged;
  std::vector<std::string> review_items;
  std::vector<std::string> pattern_ids;

  bool submitted_by(std::string_view worker) const {
    return std::any_of(submissions.begin(), submissions.end(), [&](const auto& s) { return s.first == worker; });
  }
};

/// finalize() refused because review items are still open.
class PendingReviews : public Conflict {
 public:
  PendingReviews(const std::string& task_id, std::vector<std::string> pending)
      : Conflict("task '" + task_id + "' has " + std::to_string(pending.size()) + " pending review item(s)"),
        pending_(std::move(pending)) {}
  const std::vector<std::string>& pending() const noexcept { return pending_; }

 private:
  std::vector<std::string> pending_;
};

struct SessionConfig {
  std::size_t defect_threshold = 10;
  double iou_threshold = 0.3;
  int quorum = 3;
  CombineStrategy strategy = CombineStrategy::Average;
  /// Submissions collected per image before boxes are combined.
  int workers_per_task = 3;
  std::uint64_t seed = 0;
  /// Output directory for patterns, dev_manifest.json and dev_labels.csv;
  /// empty keeps everything in memory.
  std::filesystem::path out_dir;

  void validate() const {
    if (defect_threshold < 1) throw InvalidArgument("defect threshold must be >= 1");
    if (!(iou_threshold > 0 && iou_threshold <= 1)) throw InvalidArgument("IoU threshold must be in (0, 1]");
    if (quorum < 1) throw InvalidArgument("review quorum must be >= 1");
    if (workers_per_task < 1) throw InvalidArgument("workers per task must be >= 1");
  }
};

struct NextTask {
  enum class Kind { Task, Done, Wait };
  Kind kind = Kind::Done;
  std::string task_id;
  std::string image_id;
};

inline constexpr const char* kDevManifestFile = "dev_manifest.json";
inline constexpr const char* kDevLabelsFile = "dev_labels.csv";

/**
 * Server-side state of one annotation campaign: samples images until the
 * development set holds enough defective ones, collects boxes from several
 * workers per image, combines them, routes outliers to peer review and turns
 * the surviving boxes into crowd patterns. All methods are thread-safe;
 * each call is atomic.
 */
class AnnotationSession {
 public:
  AnnotationSession(store::DatasetManifest manifest, SessionConfig config)
      : manifest_(std::move(manifest)),
        cfg_(std::move(config)),
        rng_(cfg_.seed),
        dev_(manifest_.classes, manifest_.normal_class()) {
    cfg_.validate();
    manifest_.validate();
    for (const auto& c : manifest_.classes) {
      if (manifest_.is_defect_label(c)) defect_classes_.push_back(c);
    }
  }

  const store::DatasetManifest& manifest() const noexcept { return manifest_; }
  const SessionConfig& config() const noexcept { return cfg_; }
  const std::vector<std::string>& defect_classes() const noexcept { return defect_classes_; }

  /// An open task this worker has not submitted to, else a new image, else
  /// Done once the threshold is met (Wait while other tasks are in flight
  /// and the pool is empty).
  NextTask next_task(const std::string& worker_id) {
    require_worker(worker_id);
    std::lock_guard lock(mutex_);
    for (const auto& id : task_order_) {
      const auto& t = tasks_.at(id);
      if (t.state == TaskState::Open && !t.submitted_by(worker_id)) return {NextTask::Kind::Task, t.task_id, t.image_id};
    }
    std::set<std::string> exclude = omitted_;
    bool in_flight = false;
    for (const auto& [id, t] : tasks_) {
      exclude.insert(t.image_id);
      in_flight |= t.state != TaskState::Finalized;
    }
    std::optional<std::string> image;
    try {
      image = next_image_to_annotate(manifest_, dev_, cfg_.defect_threshold, rng_, exclude);
    } catch (const ExhaustedPool&) {
      if (in_flight) return {NextTask::Kind::Wait, {}, {}};
      throw;
    }
    if (!image) return {NextTask::Kind::Done, {}, {}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "t%05zu", tasks_.size() + 1);
    AnnotationTask t;
    t.task_id = buf;
    t.image_id = *image;
    task_order_.push_back(t.task_id);
    tasks_.emplace(t.task_id, t);
    return {NextTask::Kind::Task, t.task_id, t.image_id};
  }

  /**
   * Records one worker's boxes (possibly none). Binary tasks may omit the
   * class; it defaults to the defect class. When the task has its full
   * complement of submissions the boxes are combined.
   */
  AnnotationTask submit_boxes(const std::string& task_id, const std::string& worker_id,
                              std::vector<BoundingBox> boxes) {
    require_worker(worker_id);
    std::lock_guard lock(mutex_);
    AnnotationTask& t = task_ref(task_id);
    if (t.state != TaskState::Open) {
      throw Conflict("task '" + task_id + "' is " + std::string(to_string(t.state)) + ", not open");
    }
    if (t.submitted_by(worker_id)) {
      throw Conflict("worker '" + worker_id + "' already submitted boxes for task '" + task_id + "'");
    }
    const GrayImage& img = image_locked(t.image_id);
    for (auto& b : boxes) {
      if (b.defect_class.empty()) {
        if (defect_classes_.size() != 1) throw InvalidArgument("box class is required for multi-class tasks");
        b.defect_class = defect_classes_.front();
      }
      if (std::find(defect_classes_.begin(), defect_classes_.end(), b.defect_class) == defect_classes_.end()) {
        throw InvalidArgument("'" + b.defect_class + "' is not a defect class");
      }
      b.validate(img.width(), img.height());
      b.worker_id = worker_id;
      b.image_id = t.image_id;
    }
    t.submissions.emplace_back(worker_id, std::move(boxes));
    if (static_cast<int>(t.submissions.size()) >= cfg_.workers_per_task) combine_locked(t);
    return t;
  }

  /// Oldest pending review item this worker has not voted on.
  std::optional<ReviewItem> next_review(const std::string& worker_id) {
    require_worker(worker_id);
    std::lock_guard lock(mutex_);
    for (const auto& id : review_order_) {
      const auto& item = reviews_.at(id);
      if (item.resolution == Resolution::Pending && !item.has_voted(worker_id)) return item;
    }
    return std::nullopt;
  }

  ReviewItem vote(const std::string& item_id, const std::string& worker_id, Vote v) {
    std::lock_guard lock(mutex_);
    const auto it = reviews_.find(item_id);
    if (it == reviews_.end()) throw NotFound("no review item '" + item_id + "'");
    it->second = submit_review_vote(it->second, worker_id, v, cfg_.quorum);
    AnnotationTask& t = tasks_.at(it->second.task_id);
    if (t.state == TaskState::InReview && pending_locked(t).empty()) {
      t.state = TaskState::Annotated;
      finalize_locked(t);
    }
    return it->second;
  }

  /// Pattern ids of a finalized task. Finalizes an annotated task; throws
  /// PendingReviews while review items are open.
  std::vector<std::string> finalize(const std::string& task_id) {
    std::lock_guard lock(mutex_);
    AnnotationTask& t = task_ref(task_id);
    if (t.state == TaskState::Open) {
      throw Conflict("task '" + task_id + "' has " + std::to_string(t.submissions.size()) + " of " +
                     std::to_string(cfg_.workers_per_task) + " submissions");
    }
    if (t.state == TaskState::InReview) throw PendingReviews(task_id, pending_locked(t));
    if (t.state == TaskState::Annotated) finalize_locked(t);
    return t.pattern_ids;
  }

  AnnotationTask task(const std::string& task_id) const {
    std::lock_guard lock(mutex_);
    const auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw NotFound("no task '" + task_id + "'");
    return it->second;
  }

  ReviewItem review(const std::string& item_id) const {
    std::lock_guard lock(mutex_);
    const auto it = reviews_.find(item_id);
    if (it == reviews_.end()) throw NotFound("no review item '" + item_id + "'");
    return it->second;
  }

  /// Serves `img` for `image_id` instead of loading it from the manifest path.
  void provide_image(const std::string& image_id, GrayImage img) {
    std::lock_guard lock(mutex_);
    manifest_.find(image_id);
    images_.insert_or_assign(image_id, std::move(img));
  }

  GrayImage image(const std::string& image_id) {
    std::lock_guard lock(mutex_);
    return image_locked(image_id);
  }

  DevelopmentSet dev_set() const {
    std::lock_guard lock(mutex_);
    return dev_;
  }

  std::vector<Pattern> patterns() const {
    std::lock_guard lock(mutex_);
    return patterns_;
  }

  std::vector<AnnotationTask> tasks() const {
    std::lock_guard lock(mutex_);
    std::vector<AnnotationTask> out;
    for (const auto& id : task_order_) out.push_back(tasks_.at(id));
    return out;
  }

  /// Threshold met and every task finalized.
  bool done() const {
    std::lock_guard lock(mutex_);
    if (dev_.defect_count() < cfg_.defect_threshold) return false;
    return std::all_of(tasks_.begin(), tasks_.end(), [](const auto& kv) { return kv.second.state == TaskState::Finalized; });
  }

 private:
  static void require_worker(const std::string& worker_id) {
    if (worker_id.empty()) throw InvalidArgument("worker id is required");
  }

  AnnotationTask& task_ref(const std::string& task_id) {
    const auto it = tasks_.find(task_id);
    if (it == tasks_.end()) throw NotFound("no task '" + task_id + "'");
    return it->second;
  }

  const GrayImage& image_locked(const std::string& image_id) {
    auto it = images_.find(image_id);
    if (it == images_.end()) it = images_.emplace(image_id, store::load_image(manifest_, image_id)).first;
    return it->second;
  }

  std::vector<std::string> pending_locked(const AnnotationTask& t) const {
    std::vector<std::string> out;
    for (const auto& id : t.review_items) {
      if (reviews_.at(id).resolution == Resolution::Pending) out.push_back(id);
    }
    return out;
  }

  void combine_locked(AnnotationTask& t) {
    std::vector<BoundingBox> all;
    for (const auto& [worker, boxes] : t.submissions) all.insert(all.end(), boxes.begin(), boxes.end());
    CombineResult r = combine_boxes(all, cfg_.strategy, cfg_.iou_threshold);
    t.merged = std::move(r.merged);
    for (auto& b : r.outliers) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "r%05zu", reviews_.size() + 1);
      ReviewItem item{buf, t.task_id, std::move(b), {}, Resolution::Pending};
      review_order_.push_back(item.item_id);
      t.review_items.push_back(item.item_id);
      reviews_.emplace(item.item_id, std::move(item));
    }
    t.state = t.review_items.empty() ? TaskState::Annotated : TaskState::InReview;
    if (t.state == TaskState::Annotated) finalize_locked(t);
  }

  void finalize_locked(AnnotationTask& t) {
    std::vector<BoundingBox> keep = t.merged;
    for (const auto& id : t.review_items) {
      const auto& item = reviews_.at(id);
      if (item.resolution == Resolution::Accepted) keep.push_back(item.box);
    }
    const GrayImage& img = image_locked(t.image_id);
    std::map<std::string, int> class_votes;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      const auto& b = keep[k];
      Pattern p;
      p.id = t.image_id + "-p" + std::to_string(k);
      p.pixels = img.crop(b.x0, b.y0, b.x1, b.y1);
      p.original_size = {b.width(), b.height()};
      p.provenance = Provenance::Crowd;
      p.defect_class = b.defect_class;
      p.source_image_id = t.image_id;
      t.pattern_ids.push_back(p.id);
      patterns_.push_back(std::move(p));
      ++class_votes[b.defect_class];
    }
    std::optional<std::string> label;
    if (!class_votes.empty()) {
      int best = -1;
      for (const auto& [cls, n] : class_votes) {
        if (n > best) {
          best = n;
          label = cls;
        }
      }
    } else if (manifest_.normal_class()) {
      label = manifest_.normal_class();
    }
    if (label) {
      dev_.add({t.image_id, *label});
    } else {
      omitted_.insert(t.image_id);
      log_warning("image '" + t.image_id + "' received no boxes in a multi-class task; left out of the development set");
    }
    t.state = TaskState::Finalized;
    persist_locked();
  }

  void persist_locked() const {
    if (cfg_.out_dir.empty()) return;
    store::persist_patterns(cfg_.out_dir, patterns_);
    store::DatasetManifest dm;
    dm.name = manifest_.name + "-dev";
    dm.task_type = manifest_.task_type;
    dm.classes = manifest_.classes;
    dm.base_dir = manifest_.base_dir;
    std::vector<store::LabelRow> rows;
    for (const auto& e : dev_.entries()) {
      dm.images.push_back({e.image_id, manifest_.find(e.image_id).path, e.gold_label});
      rows.push_back({e.image_id, e.gold_label});
    }
    store::save_manifest(dm, cfg_.out_dir / kDevManifestFile);
    store::write_labels_csv(cfg_.out_dir / kDevLabelsFile, rows);
  }

  store::DatasetManifest manifest_;
  SessionConfig cfg_;
  std::vector<std::string> defect_classes_;
  mutable std::mutex mutex_;
  Rng rng_;
  DevelopmentSet dev_;
  std::map<std::string, AnnotationTask> tasks_;
  std::vector<std::string> task_order_;
  std::map<std::string, ReviewItem> reviews_;
  std::vector<std::string> review_order_;
  std::vector<Pattern> patterns_;
  std::set<std::string> omitted_;
  std::map<std::string, GrayImage> images_;
};

}  // namespace gadget::annotate

#endif  // GADGET_ANNOTATE_SESSION_HPP
