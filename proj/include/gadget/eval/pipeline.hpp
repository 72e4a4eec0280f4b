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

#ifndef GADGET_EVAL_PIPELINE_HPP
#define GADGET_EVAL_PIPELINE_HPP

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "gadget/augment/augment.hpp"
#include "gadget/eval/crowd_sim.hpp"
#include "gadget/eval/metrics.hpp"
#include "gadget/label/train.hpp"
#include "gadget/match/featurize.hpp"

namespace gadget::eval {

struct PipelineConfig {
  annotate::SessionConfig session = [] {
    annotate::SessionConfig s;
    s.defect_threshold = 60;
    return s;
  }();
  CrowdConfig crowd;
  augment::AugmentConfig augment = [] {
    augment::AugmentConfig a;
    a.budget = 100;
    a.search.per_policy_cap = 30;
    return a;
  }();
  match::PyramidConfig pyramid;
  label::TrainConfig train;
  int jobs = 1;
  std::uint64_t seed = 0;
};

/// Labeler outcome on the images outside the development set.
struct LearnOutcome {
  std::vector<Pattern> patterns;
  std::optional<augment::PolicyCombo> combo;
  /// One row per dataset image, dataset order.
  std::vector<FeatureVector> features;
  label::TuneResult tune;
  std::vector<WeakLabel> weak;
  std::vector<std::string> weak_gold;
  /// Task F1 of the weak labels against gold.
  double weak_f1 = 0.0;
};

struct PipelineResult {
  CrowdOutcome crowd;
  LearnOutcome learn;
};

inline std::vector<augment::LabeledImage> dev_images(const SynthDataset& ds, const DevelopmentSet& dev) {
  std::vector<augment::LabeledImage> out;
  for (const auto& e : dev.entries()) out.push_back({e.image_id, &ds.images[ds.index_of(e.image_id)].image, e.gold_label});
  return out;
}

inline double labels_f1(std::span<const std::string> gold, std::span<const std::string> predicted,
                        std::span<const std::string> classes) {
  const auto g = label::encode_labels(gold, classes);
  const auto p = label::encode_labels(predicted, classes);
  return task_f1(g, p, static_cast<int>(classes.size()));
}

/**
 * Augment -> featurize -> tune on the development set -> weak-label the
 * rest. `preset` skips the policy search.
 */
inline LearnOutcome learn(const SynthDataset& ds, const CrowdOutcome& crowd, const PipelineConfig& cfg,
                          const augment::PolicyCombo* preset = nullptr, const label::TuneOptions& tune_opts = {}) {
  const Rng root(cfg.seed);
  LearnOutcome out;
  const auto dev = dev_images(ds, crowd.dev);
  augment::AugmentConfig acfg = cfg.augment;
  acfg.jobs = cfg.jobs;
  acfg.search.pyramid = cfg.pyramid;
  acfg.search.train.folds = cfg.train.folds;
  Rng aug_rng = root.child(3);
  auto aug = augment::augment(crowd.patterns, dev, ds.classes, acfg, aug_rng, preset);
  out.patterns = std::move(aug.patterns);
  out.combo = std::move(aug.combo);

  std::vector<match::ImageRef> refs;
  for (const auto& im : ds.images) refs.push_back({im.id, &im.image});
  out.features = match::featurize(refs, out.patterns, cfg.pyramid, cfg.jobs);

  std::vector<FeatureVector> dev_rows, rest_rows;
  std::vector<std::string> dev_labels;
  for (const auto& e : crowd.dev.entries()) {
    dev_rows.push_back(out.features[ds.index_of(e.image_id)]);
    dev_labels.push_back(e.gold_label);
  }
  std::set<std::string> in_dev;
  for (const auto& e : crowd.dev.entries()) in_dev.insert(e.image_id);
  for (std::size_t i = 0; i < ds.images.size(); ++i) {
    if (in_dev.contains(ds.images[i].id)) continue;
    rest_rows.push_back(out.features[i]);
    out.weak_gold.push_back(ds.images[i].label);
  }
  std::vector<std::string> names;
  for (const auto& p : out.patterns) names.push_back("p_" + p.id);
  label::TrainConfig tcfg = cfg.train;
  tcfg.jobs = cfg.jobs;
  tcfg.seed = root.child(4).next_u64();
  out.tune = label::tune(label::to_matrix(dev_rows), label::encode_labels(dev_labels, ds.classes), ds.classes, tcfg,
                         names, tune_opts);
  out.weak = label::predict(out.tune.model, rest_rows);
  std::vector<std::string> predicted;
  for (const auto& w : out.weak) predicted.push_back(w.predicted_class);
  out.weak_f1 = labels_f1(out.weak_gold, predicted, ds.classes);
  return out;
}

inline CrowdOutcome annotate_stage(const SynthDataset& ds, const PipelineConfig& cfg) {
  const Rng root(cfg.seed);
  annotate::SessionConfig scfg = cfg.session;
  scfg.seed = root.child(2).next_u64();
  CrowdConfig ccfg = cfg.crowd;
  ccfg.seed = root.child(1).next_u64();
  return simulate_crowd(ds, scfg, ccfg);
}

/// Annotation (simulated crowd) followed by learn().
inline PipelineResult run_pipeline(const SynthDataset& ds, const PipelineConfig& cfg) {
  PipelineResult r;
  r.crowd = annotate_stage(ds, cfg);
  r.learn = learn(ds, r.crowd, cfg);
  return r;
}

}  // namespace gadget::eval

#endif  // GADGET_EVAL_PIPELINE_HPP
