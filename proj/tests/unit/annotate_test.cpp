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

#include <gtest/gtest.h>

#include <set>

#include "../test_util.hpp"
#include "gadget/annotate/session.hpp"
#include "gadget/store/pattern_store.hpp"

using namespace gadget;
using namespace gadget::annotate;

namespace {

BoundingBox box(int x0, int y0, int x1, int y1, std::string worker = "w", std::string cls = "defect") {
  return {x0, y0, x1, y1, std::move(worker), "img", std::move(cls)};
}

BoundingBox random_box(Rng& r, int extent) {
  const int x0 = static_cast<int>(r.index(extent - 4)), y0 = static_cast<int>(r.index(extent - 4));
  const int x1 = x0 + 1 + static_cast<int>(r.index(extent - x0)), y1 = y0 + 1 + static_cast<int>(r.index(extent - y0));
  return box(std::min(x1 - 1, x0), y0, x1, y1, "w" + std::to_string(r.index(100)));
}

// Pairwise overlap matrix closed transitively (Floyd-Warshall), clusters as
// sets of boxes.
std::set<std::multiset<std::tuple<int, int, int, int, std::string>>> oracle_clusters(
    const std::vector<BoundingBox>& b, double t) {
  const std::size_t n = b.size();
  std::vector<std::vector<char>> reach(n, std::vector<char>(n, 0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const int iw = std::min(b[i].x1, b[j].x1) - std::max(b[i].x0, b[j].x0);
      const int ih = std::min(b[i].y1, b[j].y1) - std::max(b[i].y0, b[j].y0);
      const double inter = iw > 0 && ih > 0 ? double(iw) * ih : 0.0;
      const double uni = double(b[i].area()) + double(b[j].area()) - inter;
      reach[i][j] = i == j || inter / uni >= t;
    }
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) reach[i][j] |= reach[i][k] && reach[k][j];
  std::set<std::multiset<std::tuple<int, int, int, int, std::string>>> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::multiset<std::tuple<int, int, int, int, std::string>> c;
    for (std::size_t j = 0; j < n; ++j)
      if (reach[i][j]) c.insert({b[j].x0, b[j].y0, b[j].x1, b[j].y1, b[j].worker_id});
    out.insert(c);
  }
  return out;
}

std::set<std::multiset<std::tuple<int, int, int, int, std::string>>> library_clusters(
    const std::vector<BoundingBox>& b, double t) {
  std::set<std::multiset<std::tuple<int, int, int, int, std::string>>> out;
  for (const auto& members : cluster_boxes(b, t)) {
    std::multiset<std::tuple<int, int, int, int, std::string>> c;
    for (std::size_t i : members) c.insert({b[i].x0, b[i].y0, b[i].x1, b[i].y1, b[i].worker_id});
    out.insert(c);
  }
  return out;
}

}  // namespace

TEST(Combine, AverageUnionIntersectionOfTwoBoxes) {
  const std::vector<BoundingBox> b{box(0, 0, 10, 10, "a"), box(2, 2, 12, 12, "b")};
  const auto avg = combine_boxes(b, CombineStrategy::Average, 0.3);
  ASSERT_EQ(avg.merged.size(), 1u);
  EXPECT_TRUE(avg.merged[0].same_rect(box(1, 1, 11, 11)));
  EXPECT_TRUE(avg.outliers.empty());
  EXPECT_TRUE(combine_boxes(b, CombineStrategy::Union, 0.3).merged[0].same_rect(box(0, 0, 12, 12)));
  EXPECT_TRUE(combine_boxes(b, CombineStrategy::Intersection, 0.3).merged[0].same_rect(box(2, 2, 10, 10)));
}

TEST(Combine, EmptyInputAndSingletons) {
  const auto e = combine_boxes({}, CombineStrategy::Average, 0.3);
  EXPECT_TRUE(e.merged.empty());
  EXPECT_TRUE(e.outliers.empty());
  const std::vector<BoundingBox> b{box(0, 0, 5, 5), box(20, 20, 25, 25)};
  const auto r = combine_boxes(b, CombineStrategy::Average, 0.3);
  EXPECT_TRUE(r.merged.empty());
  EXPECT_EQ(r.outliers.size(), 2u);
}

TEST(Combine, EmptyIntersectionDegradesToOutliers) {
  // a-b and b-c overlap with IoU 1/3, a and c are disjoint.
  const std::vector<BoundingBox> b{box(0, 0, 10, 4, "a"), box(5, 0, 15, 4, "b"), box(10, 0, 20, 4, "c")};
  const auto r = combine_boxes(b, CombineStrategy::Intersection, 0.3);
  EXPECT_TRUE(r.merged.empty());
  EXPECT_EQ(r.outliers.size(), 3u);
  EXPECT_EQ(combine_boxes(b, CombineStrategy::Union, 0.3).merged.size(), 1u);
}

TEST(Combine, MajorityClassWithLexicographicTieBreak) {
  const std::vector<BoundingBox> b{box(0, 0, 10, 10, "a", "scratch"), box(0, 0, 10, 10, "b", "bubble")};
  EXPECT_EQ(combine_boxes(b, CombineStrategy::Average, 0.3).merged[0].defect_class, "bubble");
  const std::vector<BoundingBox> c{box(0, 0, 10, 10, "a", "scratch"), box(0, 0, 10, 10, "b", "bubble"),
                                   box(1, 0, 10, 10, "c", "scratch")};
  EXPECT_EQ(combine_boxes(c, CombineStrategy::Average, 0.3).merged[0].defect_class, "scratch");
}

TEST(Combine, RejectsMixedImages) {
  auto a = box(0, 0, 5, 5), b = box(0, 0, 5, 5);
  b.image_id = "other";
  EXPECT_THROW((void)combine_boxes(std::vector<BoundingBox>{a, b}, CombineStrategy::Average, 0.3), InvalidArgument);
}

TEST(Combine, ClustersMatchBruteForceOracle) {
  Rng r(1);
  for (int t = 0; t < 300; ++t) {
    std::vector<BoundingBox> b;
    const int n = t < 100 ? 3 : 2 + static_cast<int>(r.index(12));
    for (int i = 0; i < n; ++i) b.push_back(random_box(r, 30));
    const double thr = r.uniform(0.05, 0.9);
    ASSERT_EQ(library_clusters(b, thr), oracle_clusters(b, thr)) << "trial " << t;
  }
}

TEST(Combine, AverageLiesBetweenIntersectionAndUnion) {
  Rng r(2);
  for (int t = 0; t < 300; ++t) {
    const int x0 = static_cast<int>(r.index(20)), y0 = static_cast<int>(r.index(20));
    std::vector<BoundingBox> b{box(x0 + 2, y0 + 2, x0 + 8 + static_cast<int>(r.index(14)),
                                   y0 + 8 + static_cast<int>(r.index(14)))};
    for (int i = 0; i < 3; ++i) {
      auto j = b[0];
      j.x0 = std::max(0, j.x0 + static_cast<int>(r.index(5)) - 2);
      j.y0 = std::max(0, j.y0 + static_cast<int>(r.index(5)) - 2);
      j.x1 = std::max(j.x0 + 1, j.x1 + static_cast<int>(r.index(5)) - 2);
      j.y1 = std::max(j.y0 + 1, j.y1 + static_cast<int>(r.index(5)) - 2);
      b.push_back(j);
    }
    const auto avg = combine_boxes(b, CombineStrategy::Average, 0.01);
    const auto uni = combine_boxes(b, CombineStrategy::Union, 0.01);
    const auto inter = combine_boxes(b, CombineStrategy::Intersection, 0.01);
    ASSERT_EQ(avg.merged.size(), 1u);
    const auto& a = avg.merged[0];
    const auto& u = uni.merged[0];
    EXPECT_TRUE(u.x0 <= a.x0 && u.y0 <= a.y0 && a.x1 <= u.x1 && a.y1 <= u.y1);
    if (!inter.merged.empty()) {
      const auto& i = inter.merged[0];
      EXPECT_TRUE(a.x0 <= i.x0 && a.y0 <= i.y0 && i.x1 <= a.x1 && i.y1 <= a.y1);
    }
  }
}

TEST(Combine, PermutationInvariant) {
  Rng r(3);
  for (int t = 0; t < 100; ++t) {
    std::vector<BoundingBox> b;
    for (int i = 0; i < 8; ++i) b.push_back(random_box(r, 25));
    auto shuffled = b;
    r.shuffle(std::span<BoundingBox>(shuffled));
    for (auto s : {CombineStrategy::Average, CombineStrategy::Union, CombineStrategy::Intersection}) {
      const auto x = combine_boxes(b, s, 0.3), y = combine_boxes(shuffled, s, 0.3);
      EXPECT_EQ(x.merged, y.merged);
      EXPECT_EQ(x.outliers, y.outliers);
    }
  }
}

TEST(Review, QuorumAndMajority) {
  ReviewItem item{"r1", "t1", box(0, 0, 3, 3), {}, Resolution::Pending};
  item = submit_review_vote(item, "a", Vote::Accept, 3);
  item = submit_review_vote(item, "b", Vote::Accept, 3);
  EXPECT_EQ(item.resolution, Resolution::Pending);
  item = submit_review_vote(item, "c", Vote::Reject, 3);
  EXPECT_EQ(item.resolution, Resolution::Accepted);
  EXPECT_THROW((void)submit_review_vote(item, "d", Vote::Reject, 3), Conflict);

  ReviewItem rej{"r2", "t1", box(0, 0, 3, 3), {}, Resolution::Pending};
  for (const char* w : {"a", "b", "c"}) rej = submit_review_vote(rej, w, Vote::Reject, 3);
  EXPECT_EQ(rej.resolution, Resolution::Rejected);
}

TEST(Review, DuplicateVoteIsRejected) {
  ReviewItem item{"r1", "t1", box(0, 0, 3, 3), {}, Resolution::Pending};
  item = submit_review_vote(item, "a", Vote::Accept, 3);
  EXPECT_THROW((void)submit_review_vote(item, "a", Vote::Reject, 3), Conflict);
}

TEST(Review, EvenSplitStaysPendingUntilBroken) {
  ReviewItem item{"r1", "t1", box(0, 0, 3, 3), {}, Resolution::Pending};
  item = submit_review_vote(item, "a", Vote::Accept, 2);
  item = submit_review_vote(item, "b", Vote::Reject, 2);
  EXPECT_EQ(item.resolution, Resolution::Pending);
  item = submit_review_vote(item, "c", Vote::Reject, 2);
  EXPECT_EQ(item.resolution, Resolution::Rejected);
}

namespace {

store::DatasetManifest memory_manifest(int n) {
  store::DatasetManifest m;
  m.name = "pool";
  m.classes = {"ok", "defect"};
  for (int i = 0; i < n; ++i) m.images.push_back({"i" + std::to_string(i), "i.png", std::nullopt});
  return m;
}

}  // namespace

TEST(Sampling, DoneOnceThresholdReached) {
  const auto m = memory_manifest(20);
  DevelopmentSet dev(m.classes, m.normal_class());
  for (int i = 0; i < 10; ++i) dev.add({"i" + std::to_string(i), "defect"});
  Rng r(4);
  EXPECT_FALSE(next_image_to_annotate(m, dev, 10, r).has_value());
  EXPECT_TRUE(next_image_to_annotate(m, dev, 11, r).has_value());
}

TEST(Sampling, NeverReturnsAnnotatedImage) {
  const auto m = memory_manifest(30);
  DevelopmentSet dev(m.classes, m.normal_class());
  Rng r(5);
  for (int i = 0; i < 30; ++i) {
    const auto id = next_image_to_annotate(m, dev, 1, r);
    ASSERT_TRUE(id.has_value());
    EXPECT_FALSE(dev.contains(*id));
    dev.add({*id, "ok"});
  }
  EXPECT_THROW((void)next_image_to_annotate(m, dev, 1, r), ExhaustedPool);
}

TEST(Sampling, ExhaustedPoolReportsCounts) {
  const auto m = memory_manifest(5);
  DevelopmentSet dev(m.classes, m.normal_class());
  for (int i = 0; i < 5; ++i) dev.add({"i" + std::to_string(i), i == 0 ? "defect" : "ok"});
  Rng r(6);
  try {
    (void)next_image_to_annotate(m, dev, 3, r);
    FAIL();
  } catch (const ExhaustedPool& e) {
    EXPECT_EQ(e.annotated(), 5u);
    EXPECT_EQ(e.defects(), 1u);
    EXPECT_EQ(e.threshold(), 3u);
  }
  EXPECT_THROW((void)next_image_to_annotate(m, dev, 0, r), InvalidArgument);
}

TEST(Sampling, DrawsAreUniform) {
  const auto m = memory_manifest(4);
  DevelopmentSet dev(m.classes, m.normal_class());
  Rng r(7);
  std::map<std::string, int> counts;
  for (int i = 0; i < 8000; ++i) ++counts[*next_image_to_annotate(m, dev, 1, r)];
  for (const auto& [id, c] : counts) EXPECT_NEAR(c, 2000, 150) << id;
}

namespace {

struct SessionFixture {
  fixture::TempDir dir;
  store::DatasetManifest manifest;

  explicit SessionFixture(int images = 6) {
    Rng r(42);
    std::vector<std::pair<std::string, GrayImage>> imgs;
    for (int i = 0; i < images; ++i) imgs.emplace_back("img" + std::to_string(i), fixture::random_image_u8(r, 40, 30));
    manifest = fixture::write_dataset(dir.path(), imgs, {});
  }
};

SessionConfig config(const std::filesystem::path& out, std::size_t threshold = 1) {
  SessionConfig c;
  c.defect_threshold = threshold;
  c.out_dir = out;
  c.seed = 9;
  return c;
}

}  // namespace

TEST(Session, FullTaskLifecycleWithReview) {
  SessionFixture f;
  AnnotationSession s(f.manifest, config(f.dir.path() / "out", 1));
  const NextTask n = s.next_task("a");
  ASSERT_EQ(n.kind, NextTask::Kind::Task);
  // Same open task is offered to the other workers.
  EXPECT_EQ(s.next_task("b").task_id, n.task_id);

  s.submit_boxes(n.task_id, "a", {box(2, 2, 12, 12), box(20, 5, 30, 15), box(0, 20, 5, 25)});
  EXPECT_THROW(s.submit_boxes(n.task_id, "a", {}), Conflict);
  s.submit_boxes(n.task_id, "b", {box(3, 3, 13, 13), box(21, 5, 31, 15)});
  EXPECT_EQ(s.task(n.task_id).state, TaskState::Open);
  const auto t = s.submit_boxes(n.task_id, "c", {box(2, 2, 12, 12), box(34, 22, 38, 28)});
  EXPECT_EQ(t.state, TaskState::InReview);
  EXPECT_EQ(t.merged.size(), 2u);
  ASSERT_EQ(t.review_items.size(), 2u);
  EXPECT_THROW(s.finalize(n.task_id), PendingReviews);

  // One outlier accepted, the other rejected.
  const auto first = s.next_review("a");
  ASSERT_TRUE(first.has_value());
  for (const char* w : {"a", "b", "c"}) s.vote(t.review_items[0], w, Vote::Accept);
  for (const char* w : {"a", "b", "c"}) s.vote(t.review_items[1], w, Vote::Reject);
  EXPECT_FALSE(s.next_review("d").has_value());

  const auto done = s.task(n.task_id);
  EXPECT_EQ(done.state, TaskState::Finalized);
  EXPECT_EQ(done.pattern_ids.size(), 3u);
  EXPECT_EQ(s.finalize(n.task_id), done.pattern_ids);

  // Crops equal direct indexing into the source image.
  const GrayImage img = s.image(n.image_id);
  const auto pats = s.patterns();
  ASSERT_EQ(pats.size(), 3u);
  const auto merged0 = done.merged[0];
  for (int y = 0; y < pats[0].height(); ++y)
    for (int x = 0; x < pats[0].width(); ++x) ASSERT_EQ(pats[0].pixels.at(x, y), img.at(merged0.x0 + x, merged0.y0 + y));
  EXPECT_EQ(pats[0].provenance, Provenance::Crowd);
  EXPECT_EQ(pats[0].source_image_id, n.image_id);

  // Dev set and persisted outputs.
  EXPECT_EQ(s.dev_set().defect_count(), 1u);
  EXPECT_TRUE(s.done());
  EXPECT_EQ(s.next_task("a").kind, NextTask::Kind::Done);
  const auto stored = store::load_patterns(f.dir.path() / "out");
  EXPECT_EQ(stored, pats);
  const auto dm = store::load_manifest(f.dir.path() / "out" / kDevManifestFile);
  ASSERT_EQ(dm.images.size(), 1u);
  EXPECT_EQ(dm.images[0].label, std::optional<std::string>("defect"));
  EXPECT_EQ(store::load_image(dm, n.image_id), img);
  const auto labels = store::read_labels_csv(f.dir.path() / "out" / kDevLabelsFile);
  EXPECT_EQ(labels, (std::vector<store::LabelRow>{{n.image_id, "defect"}}));
}

TEST(Session, NoBoxesMeansNormalImage) {
  SessionFixture f;
  AnnotationSession s(f.manifest, config({}, 1));
  const auto n = s.next_task("a");
  for (const char* w : {"a", "b", "c"}) s.submit_boxes(n.task_id, w, {});
  EXPECT_EQ(s.task(n.task_id).state, TaskState::Finalized);
  const auto dev = s.dev_set();
  ASSERT_EQ(dev.size(), 1u);
  EXPECT_EQ(dev.entries()[0].gold_label, "ok");
  EXPECT_FALSE(s.done());
  // The next task is a different image.
  EXPECT_NE(s.next_task("a").image_id, n.image_id);
}

TEST(Session, RejectsInvalidBoxes) {
  SessionFixture f;
  AnnotationSession s(f.manifest, config({}, 1));
  const auto n = s.next_task("a");
  EXPECT_THROW(s.submit_boxes(n.task_id, "a", {box(0, 0, 41, 5)}), InvalidArgument);
  EXPECT_THROW(s.submit_boxes(n.task_id, "a", {box(5, 5, 5, 9)}), InvalidArgument);
  EXPECT_THROW(s.submit_boxes(n.task_id, "a", {box(0, 0, 4, 4, "a", "ok")}), InvalidArgument);
  EXPECT_THROW(s.submit_boxes("t99999", "a", {}), NotFound);
  EXPECT_THROW(s.submit_boxes(n.task_id, "", {}), InvalidArgument);
  // Rejected submissions leave the task open for the worker.
  EXPECT_NO_THROW(s.submit_boxes(n.task_id, "a", {box(0, 0, 4, 4, "a", "")}));
}

TEST(Session, ExhaustedPoolWaitsWhileTasksInFlight) {
  SessionFixture f(2);
  AnnotationSession s(f.manifest, config({}, 5));
  const auto t1 = s.next_task("a");
  s.submit_boxes(t1.task_id, "a", {});
  const auto t2 = s.next_task("a");
  s.submit_boxes(t2.task_id, "a", {});
  EXPECT_NE(t1.image_id, t2.image_id);
  EXPECT_EQ(s.next_task("a").kind, NextTask::Kind::Wait);
  EXPECT_EQ(s.next_task("b").task_id, t1.task_id);
  for (const auto& t : {t1, t2})
    for (const char* w : {"b", "c"}) s.submit_boxes(t.task_id, w, {});
  EXPECT_THROW(s.next_task("a"), ExhaustedPool);
}

TEST(Session, DeterministicGivenSeed) {
  SessionFixture f(12);
  auto run = [&] {
    AnnotationSession s(f.manifest, config({}, 100));
    std::vector<std::string> order;
    for (int i = 0; i < 12; ++i) {
      const auto n = s.next_task("a");
      order.push_back(n.image_id);
      for (const char* w : {"a", "b", "c"}) s.submit_boxes(n.task_id, w, {});
    }
    return order;
  };
  const auto a = run();
  EXPECT_EQ(a, run());
  EXPECT_EQ(std::set<std::string>(a.begin(), a.end()).size(), 12u);
}
