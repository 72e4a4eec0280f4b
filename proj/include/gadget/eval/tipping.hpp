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

#ifndef GADGET_EVAL_TIPPING_HPP
#define GADGET_EVAL_TIPPING_HPP

#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gadget/augment/policy_search.hpp"
#include "gadget/eval/end_model.hpp"
#include "gadget/eval/pipeline.hpp"
#include "gadget/store/csv.hpp"

namespace gadget::eval {

/**
 * Smallest size multiplier (relative to sizes[0]) at which the dev-only
 * curve reaches `target`, interpolating linearly between probed sizes.
 * nullopt when the curve stays below `target`.
 */
inline std::optional<double> crossing_multiplier(std::span<const std::size_t> sizes, std::span<const double> dev_f1,
                                                 double target) {
  if (sizes.empty() || sizes.size() != dev_f1.size()) {
    throw InvalidArgument("crossing: sizes and F1 values must be non-empty and aligned");
  }
  const double base = static_cast<double>(sizes[0]);
  if (dev_f1[0] >= target) return 1.0;
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (dev_f1[i] < target) continue;
    const double a = static_cast<double>(sizes[i - 1]), b = static_cast<double>(sizes[i]);
    const double t = (target - dev_f1[i - 1]) / (dev_f1[i] - dev_f1[i - 1]);
    return (a + t * (b - a)) / base;
  }
  return std::nullopt;
}

struct TippingConfig {
  /// Development-set sizes, ascending; sizes[0] is the base labeled budget.
  std::vector<std::size_t> sizes = {2500, 3750, 5000, 6250, 8000};
  double test_fraction = 0.3;
  /// GAN augmentation only: the policy search splits the development set
  /// and needs more defective images than a scarce base set holds.
  PipelineConfig pipeline = [] {
    PipelineConfig p;
    p.augment.mode = augment::AugmentMode::Gan;
    p.crowd.annotate_all = true;
    return p;
  }();
  EndModelConfig end_model;
  std::uint64_t seed = 0;
};

/// Scarce-defect default dataset for tipping runs.
inline SynthSpec tipping_synth_spec(std::uint64_t seed) {
  SynthSpec s;
  s.name = "scarce";
  s.count = 12000;
  s.defect_rate = 0.02;
  s.width = 32;
  s.height = 32;
  s.seed = seed;
  return s;
}

struct TippingRow {
  std::size_t size = 0;
  double dev_only_f1 = 0.0;
};

struct TippingResult {
  std::vector<TippingRow> curve;
  /// End model trained on the annotated base set plus weak labels.
  double weak_label_f1 = 0.0;
  /// Labeler accuracy on the weakly labeled pool images.
  double labeler_f1 = 0.0;
  std::size_t annotated = 0;
  std::size_t weak_labeled = 0;
  std::optional<double> multiplier;

  std::string multiplier_text() const {
    if (multiplier) return store::format_double(*multiplier);
    return ">" + store::format_double(static_cast<double>(curve.back().size) / static_cast<double>(curve.front().size));
  }
};

namespace detail {

inline SynthDataset subset(const SynthDataset& ds, std::span<const std::size_t> idx) {
  SynthDataset out;
  out.spec = ds.spec;
  out.classes = ds.classes;
  for (std::size_t i : idx) out.images.push_back(ds.images[i]);
  return out;
}

}  // namespace detail

/**
 * Splits `ds` into a stratified test part and a pool. The crowd annotates
 * the first sizes[0] pool images (the configured crowd is expected to have
 * annotate_all set), the
 * labeler weak-labels the remaining pool, and the end model trained on
 * annotated + weak labels gives the weak-label F1. The dev-only curve trains
 * the same end model on the first `size` pool images with gold labels. All
 * F1 values are measured on the test part.
 */
inline TippingResult tipping_point(const SynthDataset& ds, const TippingConfig& cfg) {
  if (cfg.sizes.empty()) throw InvalidArgument("tipping: no sizes");
  if (!(cfg.test_fraction > 0 && cfg.test_fraction < 1)) throw InvalidArgument("tipping: test_fraction must be in (0, 1)");
  for (std::size_t i = 0; i < cfg.sizes.size(); ++i) {
    if (cfg.sizes[i] < 1 || (i > 0 && cfg.sizes[i] <= cfg.sizes[i - 1])) {
      throw InvalidArgument("tipping: sizes must be positive and strictly increasing");
    }
  }
  const Rng root(cfg.seed);
  std::vector<std::string> gold;
  for (const auto& im : ds.images) gold.push_back(im.label);
  const auto y_all = label::encode_labels(gold, ds.classes);
  Rng split_rng = root.child(1);
  auto [pool_idx, test_idx] = augment::stratified_split(y_all, static_cast<int>(ds.classes.size()),
                                                        1.0 - cfg.test_fraction, split_rng);
  Rng order_rng = root.child(2);
  order_rng.shuffle(std::span<std::size_t>(pool_idx));
  if (cfg.sizes.back() > pool_idx.size()) {
    throw InvalidArgument("tipping: largest size " + std::to_string(cfg.sizes.back()) + " exceeds the pool of " +
                          std::to_string(pool_idx.size()) + " images");
  }

  const SynthDataset pool = detail::subset(ds, pool_idx);
  const SynthDataset base = detail::subset(ds, std::span<const std::size_t>(pool_idx).first(cfg.sizes[0]));
  std::size_t base_defects = 0;
  for (const auto& im : base.images) base_defects += im.boxes.empty() ? 0 : 1;
  if (base_defects == 0) throw InvalidArgument("tipping: the base set holds no defective image");

  PipelineConfig pcfg = cfg.pipeline;
  pcfg.seed = root.child(3).next_u64();
  const CrowdOutcome crowd = annotate_stage(base, pcfg);
  const LearnOutcome learned = learn(pool, crowd, pcfg);

  TippingResult out;
  out.labeler_f1 = learned.weak_f1;
  out.annotated = crowd.dev.entries().size();
  out.weak_labeled = learned.weak.size();

  std::vector<const GrayImage*> imgs;
  for (const auto& im : ds.images) imgs.push_back(&im.image);
  const label::Matrix x = end_model_matrix(imgs, cfg.end_model.cells);
  const label::Matrix x_test = label::select_rows(x, test_idx);
  std::vector<int> y_test;
  for (std::size_t i : test_idx) y_test.push_back(y_all[i]);
  const int k = static_cast<int>(ds.classes.size());
  const Rng model_root = root.child(4);

  // Weak-label arm: annotated images keep their crowd labels, the rest of
  // the pool takes the labeler's prediction.
  {
    std::set<std::string> in_dev;
    std::vector<std::size_t> rows;
    std::vector<std::string> labels;
    for (const auto& e : crowd.dev.entries()) {
      in_dev.insert(e.image_id);
      rows.push_back(pool_idx[pool.index_of(e.image_id)]);
      labels.push_back(e.gold_label);
    }
    std::size_t w = 0;
    for (std::size_t i = 0; i < pool.images.size(); ++i) {
      if (in_dev.contains(pool.images[i].id)) continue;
      rows.push_back(pool_idx[i]);
      labels.push_back(learned.weak[w++].predicted_class);
    }
    Rng rng = model_root;
    out.weak_label_f1 = end_model_f1(label::select_rows(x, rows), label::encode_labels(labels, ds.classes), x_test,
                                     y_test, k, cfg.end_model, rng);
  }

  std::vector<double> curve;
  for (std::size_t s : cfg.sizes) {
    std::vector<std::size_t> rows(pool_idx.begin(), pool_idx.begin() + static_cast<std::ptrdiff_t>(s));
    std::vector<int> y;
    for (std::size_t i : rows) y.push_back(y_all[i]);
    Rng rng = model_root;
    const double f = end_model_f1(label::select_rows(x, rows), y, x_test, y_test, k, cfg.end_model, rng);
    out.curve.push_back({s, f});
    curve.push_back(f);
  }
  out.multiplier = crossing_multiplier(cfg.sizes, curve, out.weak_label_f1);
  return out;
}

inline std::string tipping_to_csv(const TippingResult& r) {
  std::ostringstream os;
  os << "size,multiplier,dev_only_f1,weak_label_f1\n";
  for (const auto& row : r.curve) {
    os << row.size << ',' << store::format_double(static_cast<double>(row.size) / static_cast<double>(r.curve.front().size))
       << ',' << store::format_double(row.dev_only_f1) << ',' << store::format_double(r.weak_label_f1) << '\n';
  }
  return os.str();
}

}  // namespace gadget::eval

#endif  // GADGET_EVAL_TIPPING_HPP
