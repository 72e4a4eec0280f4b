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

#ifndef GADGET_EVAL_ABLATION_HPP
#define GADGET_EVAL_ABLATION_HPP

#include <algorithm>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "gadget/core/parallel.hpp"
#include "gadget/eval/pipeline.hpp"
#include "gadget/store/csv.hpp"

namespace gadget::eval {

enum class AblationKind { Workflow, Strategy, Augmentation, Tuning };

inline std::string_view to_string(AblationKind k) {
  switch (k) {
    case AblationKind::Workflow: return "workflow";
    case AblationKind::Strategy: return "strategy";
    case AblationKind::Augmentation: return "augment";
    case AblationKind::Tuning: return "tuning";
  }
  return "?";
}

inline AblationKind parse_ablation_kind(std::string_view s) {
  if (s == "workflow") return AblationKind::Workflow;
  if (s == "strategy") return AblationKind::Strategy;
  if (s == "augment" || s == "augmentation") return AblationKind::Augmentation;
  if (s == "tuning") return AblationKind::Tuning;
  throw InvalidArgument("ablation kind must be workflow, strategy, augment or tuning, got '" + std::string(s) + "'");
}

struct AblationRow {
  std::string dataset;
  std::string condition;
  double f1 = 0.0;
  std::size_t patterns = 0;
};

struct AblationReport {
  AblationKind kind = AblationKind::Workflow;
  std::vector<AblationRow> rows;

  const AblationRow& row(std::string_view dataset, std::string_view condition) const {
    for (const auto& r : rows) {
      if (r.dataset == dataset && r.condition == condition) return r;
    }
    throw NotFound("no ablation row " + std::string(dataset) + "/" + std::string(condition));
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << "dataset,condition,f1,patterns\n";
    for (const auto& r : rows) {
      os << r.dataset << ',' << r.condition << ',' << store::format_double(r.f1) << ',' << r.patterns << '\n';
    }
    return os.str();
  }

  std::string summary() const {
    std::ostringstream os;
    os << to_string(kind) << " ablation\n";
    for (const auto& r : rows) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.4f", r.f1);
      os << "  " << r.dataset << "  " << r.condition << "  F1 " << buf << "  (" << r.patterns << " patterns)\n";
    }
    return os.str();
  }
};

struct AblationCondition {
  std::string name;
  PipelineConfig config;
};

/// Crowd workflow: one worker per task, peer review that accepts everything,
/// and the full workflow (three workers, averaged boxes, truthful review).
inline std::vector<AblationCondition> workflow_conditions(const PipelineConfig& base) {
  AblationCondition no_avg{"no_avg", base};
  no_avg.config.crowd.workers = 1;
  AblationCondition no_review{"no_review", base};
  no_review.config.crowd.review = ReviewBehavior::AcceptAll;
  return {no_avg, no_review, {"full", base}};
}

inline std::vector<AblationCondition> strategy_conditions(const PipelineConfig& base) {
  std::vector<AblationCondition> out;
  for (auto s : {annotate::CombineStrategy::Average, annotate::CombineStrategy::Union,
                 annotate::CombineStrategy::Intersection}) {
    AblationCondition c{std::string(annotate::to_string(s)), base};
    c.config.session.strategy = s;
    out.push_back(std::move(c));
  }
  return out;
}

/**
 * Full pipeline per condition and dataset, all with the same seed so the
 * conditions differ only in what they change. Conditions run on up to
 * `jobs` threads.
 */
inline AblationReport run_pipeline_ablation(AblationKind kind, std::span<const SynthDataset> datasets,
                                            std::span<const AblationCondition> conditions, int jobs) {
  AblationReport report{kind, {}};
  const std::size_t n = datasets.size() * conditions.size();
  report.rows.resize(n);
  parallel_for(n, jobs, [&](std::size_t i) {
    const SynthDataset& ds = datasets[i / conditions.size()];
    const AblationCondition& c = conditions[i % conditions.size()];
    PipelineConfig cfg = c.config;
    if (jobs > 1) cfg.jobs = 1;
    const auto r = run_pipeline(ds, cfg);
    report.rows[i] = {ds.spec.name, c.name, r.learn.weak_f1, r.learn.patterns.size()};
  });
  return report;
}

/**
 * None / Policy / GAN / Both on one crowd outcome. The policy combination
 * is searched once and shared by Policy and Both.
 */
inline AblationReport augmentation_ablation(std::span<const SynthDataset> datasets, const PipelineConfig& base) {
  AblationReport report{AblationKind::Augmentation, {}};
  for (const auto& ds : datasets) {
    const CrowdOutcome crowd = annotate_stage(ds, base);
    std::optional<augment::PolicyCombo> combo;
    for (auto mode : {augment::AugmentMode::None, augment::AugmentMode::Policy, augment::AugmentMode::Gan,
                      augment::AugmentMode::Both}) {
      PipelineConfig cfg = base;
      cfg.augment.mode = mode;
      const auto out = learn(ds, crowd, cfg, combo ? &*combo : nullptr);
      if (!combo && out.combo) combo = out.combo;
      report.rows.push_back({ds.spec.name, std::string(augment::to_string(mode)), out.weak_f1, out.patterns.size()});
    }
  }
  return report;
}

/**
 * Weak-label F1 of every architecture in the tuning grid next to the one
 * cross-validation picked: rows min, selected, max, then one per grid
 * entry.
 */
inline AblationReport tuning_ablation(std::span<const SynthDataset> datasets, const PipelineConfig& base) {
  AblationReport report{AblationKind::Tuning, {}};
  for (const auto& ds : datasets) {
    const CrowdOutcome crowd = annotate_stage(ds, base);
    label::TuneOptions opts;
    opts.keep_models = true;
    const auto out = learn(ds, crowd, base, nullptr, opts);
    std::set<std::string> in_dev;
    for (const auto& e : crowd.dev.entries()) in_dev.insert(e.image_id);
    std::vector<FeatureVector> rest;
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
      if (!in_dev.contains(ds.images[i].id)) rest.push_back(out.features[i]);
    }
    std::vector<AblationRow> per_arch;
    for (const auto& m : out.tune.models) {
      std::vector<std::string> predicted;
      for (const auto& w : label::predict(m, rest)) predicted.push_back(w.predicted_class);
      per_arch.push_back({ds.spec.name, "arch_" + m.arch.name(), labels_f1(out.weak_gold, predicted, ds.classes),
                          out.patterns.size()});
    }
    const auto [lo, hi] = std::minmax_element(per_arch.begin(), per_arch.end(),
                                              [](const auto& a, const auto& b) { return a.f1 < b.f1; });
    report.rows.push_back({ds.spec.name, "min", lo->f1, out.patterns.size()});
    report.rows.push_back({ds.spec.name, "selected", out.weak_f1, out.patterns.size()});
    report.rows.push_back({ds.spec.name, "max", hi->f1, out.patterns.size()});
    report.rows.insert(report.rows.end(), per_arch.begin(), per_arch.end());
  }
  return report;
}

inline AblationReport run_ablation(AblationKind kind, std::span<const SynthDataset> datasets,
                                   const PipelineConfig& base) {
  switch (kind) {
    case AblationKind::Workflow: {
      const auto c = workflow_conditions(base);
      return run_pipeline_ablation(kind, datasets, c, base.jobs);
    }
    case AblationKind::Strategy: {
      const auto c = strategy_conditions(base);
      return run_pipeline_ablation(kind, datasets, c, base.jobs);
    }
    case AblationKind::Augmentation: return augmentation_ablation(datasets, base);
    case AblationKind::Tuning: return tuning_ablation(datasets, base);
  }
  throw InvalidArgument("unknown ablation kind");
}

}  // namespace gadget::eval

#endif  // GADGET_EVAL_ABLATION_HPP
