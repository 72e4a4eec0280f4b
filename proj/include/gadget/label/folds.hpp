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

#ifndef GADGET_LABEL_FOLDS_HPP
#define GADGET_LABEL_FOLDS_HPP

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "gadget/core/error.hpp"
#include "gadget/core/rng.hpp"

namespace gadget::label {

class TooFewExamples : public InvalidArgument {
 public:
  TooFewExamples(std::string class_name, std::size_t have, std::size_t need)
      : InvalidArgument("too few examples of class '" + class_name + "': have " + std::to_string(have) +
                        ", need " + std::to_string(need)),
        class_name_(std::move(class_name)),
        have_(have),
        need_(need) {}

  const std::string& class_name() const noexcept { return class_name_; }
  std::size_t have() const noexcept { return have_; }
  std::size_t need() const noexcept { return need_; }

 private:
  std::string class_name_;
  std::size_t have_;
  std::size_t need_;
};

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

struct FoldConfig {
  int min_per_class = 20;
  int max_folds = 5;
};

/// Largest k <= max_folds leaving every class >= min_per_class examples per
/// fold; 0 when even two folds are impossible.
inline int fold_count(std::span<const int> labels, int class_count, const FoldConfig& cfg = {}) {
  std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
  for (int y : labels) ++counts.at(static_cast<std::size_t>(y));
  std::size_t k = static_cast<std::size_t>(cfg.max_folds);
  for (std::size_t c : counts) k = std::min(k, c / static_cast<std::size_t>(cfg.min_per_class));
  return k < 2 ? 0 : static_cast<int>(k);
}

/**
 * Stratified k-fold split: each class is shuffled and dealt round-robin to
 * the folds. Index lists are sorted.
 */
inline std::vector<Fold> make_folds(std::span<const int> labels, std::span<const std::string> classes, Rng& rng,
                                    const FoldConfig& cfg = {}) {
  if (cfg.min_per_class < 1 || cfg.max_folds < 2) throw InvalidArgument("folds: invalid configuration");
  const int class_count = static_cast<int>(classes.size());
  std::vector<std::vector<std::size_t>> by_class(classes.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count) throw InvalidArgument("folds: label index out of range");
    by_class[static_cast<std::size_t>(labels[i])].push_back(i);
  }
  const int k = fold_count(labels, class_count, cfg);
  if (k == 0) {
    const auto need = static_cast<std::size_t>(2 * cfg.min_per_class);
    for (std::size_t c = 0; c < classes.size(); ++c) {
      if (by_class[c].size() < need) throw TooFewExamples(classes[c], by_class[c].size(), need);
    }
  }
  std::vector<Fold> folds(static_cast<std::size_t>(k));
  for (auto& members : by_class) {
    rng.shuffle(std::span<std::size_t>(members));
    for (std::size_t j = 0; j < members.size(); ++j) folds[j % folds.size()].validation.push_back(members[j]);
  }
  for (auto& f : folds) {
    std::sort(f.validation.begin(), f.validation.end());
    std::vector<char> in_val(labels.size(), 0);
    for (std::size_t i : f.validation) in_val[i] = 1;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (!in_val[i]) f.train.push_back(i);
  }
  return folds;
}

}  // namespace gadget::label

#endif  // GADGET_LABEL_FOLDS_HPP
