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

#ifndef GADGET_AUGMENT_POLICY_SEARCH_HPP
#define GADGET_AUGMENT_POLICY_SEARCH_HPP

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gadget/augment/policy.hpp"
#include "gadget/core/log.hpp"
#include "gadget/core/parallel.hpp"
#include "gadget/eval/metrics.hpp"
#include "gadget/label/train.hpp"
#include "gadget/match/featurize.hpp"

namespace gadget::augment {

/// Up to three policies, each with its sampled magnitudes.
struct PolicyCombo {
  std::vector<Policy> policies;
  std::vector<std::vector<double>> magnitudes;
  /// Held-out F1 the combo scored during search.
  double f1 = 0.0;

  std::string name() const {
    std::string s;
    for (const auto& p : policies) s += (s.empty() ? "" : "+") + p.name();
    return s;
  }
};

/// All k-subsets of {0..n-1} in lexicographic order; k is capped at n.
inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
  k = std::min(k, n);
  std::vector<std::vector<std::size_t>> out;
  if (k == 0) return out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    out.push_back(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

inline std::vector<std::vector<double>> sample_magnitudes(std::span<const Policy> policies, int count, Rng& rng) {
  std::vector<std::vector<double>> out;
  for (const auto& p : policies) {
    p.validate();
    std::vector<double> m;
    for (int i = 0; i < count; ++i) m.push_back(rng.uniform(p.lo, p.hi));
    out.push_back(std::move(m));
  }
  return out;
}

/// Scores a combo given as candidate indices; higher is better.
using ComboEvaluator = std::function<double(std::span<const std::size_t>)>;

/**
 * Exhaustive search over combos of `combo_size` candidates (fewer when
 * there are fewer candidates). The first combo with the strictly highest
 * score wins.
 */
inline PolicyCombo search_policy_combo(std::span<const Policy> candidates,
                                       const std::vector<std::vector<double>>& magnitudes,
                                       const ComboEvaluator& evaluate, std::size_t combo_size = 3) {
  if (candidates.empty()) throw InvalidArgument("policy search: no candidate policies");
  if (magnitudes.size() != candidates.size()) {
    throw InvalidArgument("policy search: one magnitude list per candidate required");
  }
  const auto combos = combinations(candidates.size(), combo_size);
  std::size_t best = 0;
  double best_score = -1.0;
  for (std::size_t c = 0; c < combos.size(); ++c) {
    const double s = evaluate(combos[c]);
    if (s > best_score) {
      best_score = s;
      best = c;
    }
  }
  PolicyCombo out;
  for (std::size_t i : combos[best]) {
    out.policies.push_back(candidates[i]);
    out.magnitudes.push_back(magnitudes[i]);
  }
  out.f1 = best_score;
  return out;
}

struct LabeledImage {
  std::string id;
  const GrayImage* image = nullptr;
  std::string label;
};

struct PolicySearchConfig {
  double train_fraction = 0.7;
  int magnitudes = 10;
  std::size_t combo_size = 3;
  /// Fixed labeler used to score combos.
  std::vector<int> hidden = {16};
  /// Cap on augmented patterns per candidate policy (0 = no cap).
  std::size_t per_policy_cap = 0;
  label::TrainConfig train;
  match::PyramidConfig pyramid;
  int jobs = 1;

  void validate() const {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
      throw InvalidArgument("policy search: train_fraction must be in (0, 1)");
    }
    if (magnitudes < 1) throw InvalidArgument("policy search: magnitudes must be >= 1");
    if (combo_size < 1) throw InvalidArgument("policy search: combo_size must be >= 1");
    train.validate();
    pyramid.validate();
  }
};

/// Per-class shuffle, first round(fraction * n_c) to train. Both parts come
/// back in input order.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> stratified_split(
    std::span<const int> labels, int class_count, double fraction, Rng& rng) {
  std::vector<char> in_train(labels.size(), 0);
  for (int c = 0; c < class_count; ++c) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] == c) idx.push_back(i);
    }
    rng.shuffle(std::span<std::size_t>(idx));
    const auto n_train = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(idx.size())));
    for (std::size_t i = 0; i < n_train; ++i) in_train[idx[i]] = 1;
  }
  std::vector<std::size_t> train, test;
  for (std::size_t i = 0; i < labels.size(); ++i) (in_train[i] ? train : test).push_back(i);
  return {std::move(train), std::move(test)};
}

/// Sorted random subset of `n` indices of size min(n, cap); cap 0 keeps all.
inline std::vector<std::size_t> capped_subset(std::size_t n, std::size_t cap, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  if (cap == 0 || cap >= n) return idx;
  rng.shuffle(std::span<std::size_t>(idx));
  idx.resize(cap);
  std::sort(idx.begin(), idx.end());
  return idx;
}

/// Every pattern under every magnitude of `policy`, ids suffixed with the
/// policy name and a running index.
inline std::vector<Pattern> expand_policy(std::span<const Pattern> patterns, const Policy& policy,
                                          std::span<const double> magnitudes, Rng& rng) {
  std::vector<Pattern> out;
  std::size_t k = 0;
  for (const auto& p : patterns) {
    for (double m : magnitudes) {
      Pattern a = apply_policy(p, policy, m, rng);
      a.id = p.id + "-" + policy.name() + std::to_string(k++);
      out.push_back(std::move(a));
    }
  }
  return out;
}

/**
 * Splits the development images 70/30 (stratified), expands the crowd
 * patterns cut from the train part with each candidate policy, and scores
 * every combo by the F1 on the test part of a fixed-architecture labeler
 * trained on original plus augmented feature columns.
 */
inline PolicyCombo search_policy_combo(std::span<const Pattern> patterns, std::span<const LabeledImage> dev,
                                       std::span<const std::string> classes, std::span<const Policy> candidates,
                                       Rng& rng, const PolicySearchConfig& cfg = {}) {
  cfg.validate();
  if (candidates.empty()) throw InvalidArgument("policy search: no candidate policies");
  std::vector<std::string> dev_labels;
  for (const auto& d : dev) dev_labels.push_back(d.label);
  const std::vector<int> y = label::encode_labels(dev_labels, classes);
  const int k = static_cast<int>(classes.size());

  Rng split_rng = rng.child(1);
  const auto [train_idx, test_idx] = stratified_split(y, k, cfg.train_fraction, split_rng);
  std::set<std::string> test_ids;
  for (std::size_t i : test_idx) test_ids.insert(dev[i].id);
  std::vector<Pattern> base;
  for (const auto& p : patterns) {
    if (!test_ids.contains(p.source_image_id)) base.push_back(p);
  }
  if (base.empty()) throw InvalidArgument("policy search: no patterns outside the held-out split");

  Rng mag_rng = rng.child(2);
  const auto magnitudes = sample_magnitudes(candidates, cfg.magnitudes, mag_rng);

  std::vector<match::ImageRef> refs;
  for (const auto& d : dev) refs.push_back({d.id, d.image});
  auto columns = [&](std::span<const Pattern> ps) {
    return label::to_matrix(match::featurize(refs, ps, cfg.pyramid, cfg.jobs));
  };
  const label::Matrix base_x = columns(base);
  std::vector<label::Matrix> policy_x(candidates.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    Rng t_rng = rng.child(100 + c);
    auto expanded = expand_policy(base, candidates[c], magnitudes[c], t_rng);
    Rng cap_rng = rng.child(200 + c);
    std::vector<Pattern> kept;
    for (std::size_t i : capped_subset(expanded.size(), cfg.per_policy_cap, cap_rng)) {
      kept.push_back(std::move(expanded[i]));
    }
    policy_x[c] = columns(kept);
  }

  std::vector<int> y_train, y_test;
  for (std::size_t i : train_idx) y_train.push_back(y[i]);
  for (std::size_t i : test_idx) y_test.push_back(y[i]);
  Rng fold_rng = rng.child(3);
  const auto folds = label::make_folds(y_train, classes, fold_rng, cfg.train.folds);

  const auto combos = combinations(candidates.size(), cfg.combo_size);
  std::vector<double> scores(combos.size());
  label::TrainConfig tcfg = cfg.train;
  tcfg.seed = rng.child(4).next_u64();
  parallel_for(combos.size(), cfg.jobs, [&](std::size_t ci) {
    Eigen::Index cols = base_x.cols();
    for (std::size_t c : combos[ci]) cols += policy_x[c].cols();
    label::Matrix x(base_x.rows(), cols);
    Eigen::Index at = 0;
    x.middleCols(at, base_x.cols()) = base_x;
    at += base_x.cols();
    for (std::size_t c : combos[ci]) {
      x.middleCols(at, policy_x[c].cols()) = policy_x[c];
      at += policy_x[c].cols();
    }
    const label::MlpArchitecture arch{static_cast<int>(cols), cfg.hidden, k};
    const auto trained = label::train_mlp(arch, label::select_rows(x, train_idx), y_train, classes, folds, tcfg);
    const auto& m = trained.model;
    const auto pred = label::predict_classes(m.arch, m.theta, m.standardizer.apply(label::select_rows(x, test_idx)));
    scores[ci] = eval::task_f1(y_test, pred, k);
  });
  std::size_t at = 0;
  return search_policy_combo(candidates, magnitudes,
                             [&](std::span<const std::size_t>) { return scores[at++]; }, cfg.combo_size);
}

/**
 * Expands every pattern with every (policy, magnitude) pair of the combo and
 * keeps a seeded subset of at most `budget` per class (0 = none).
 */
inline std::vector<Pattern> apply_combo(std::span<const Pattern> patterns, const PolicyCombo& combo,
                                        std::size_t budget, Rng& rng) {
  std::map<std::string, std::vector<Pattern>> by_class;
  for (std::size_t c = 0; c < combo.policies.size(); ++c) {
    Rng t_rng = rng.child(100 + c);
    for (auto& p : expand_policy(patterns, combo.policies[c], combo.magnitudes[c], t_rng)) {
      by_class[p.defect_class].push_back(std::move(p));
    }
  }
  std::vector<Pattern> out;
  std::uint64_t stream = 0;
  for (auto& [cls, ps] : by_class) {
    Rng cap_rng = rng.child(1000 + stream++);
    if (budget == 0) continue;
    for (std::size_t i : capped_subset(ps.size(), budget, cap_rng)) out.push_back(std::move(ps[i]));
  }
  return out;
}

}  // namespace gadget::augment

#endif  // GADGET_AUGMENT_POLICY_SEARCH_HPP
