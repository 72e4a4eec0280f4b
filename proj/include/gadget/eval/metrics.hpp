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

#ifndef GADGET_EVAL_METRICS_HPP
#define GADGET_EVAL_METRICS_HPP

#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "gadget/core/error.hpp"

namespace gadget::eval {

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  bool operator==(const PrecisionRecall&) const = default;
};

/// Pr = |D & P| / |P|, Re = |D & P| / |D|; empty P gives Pr = 0, empty D
/// gives Re = 0, and Pr + Re = 0 gives F1 = 0.
inline PrecisionRecall f1_from_counts(std::size_t true_positive, std::size_t predicted,
                                      std::size_t actual) {
  PrecisionRecall r;
  const double tp = static_cast<double>(true_positive);
  r.precision = predicted == 0 ? 0.0 : tp / static_cast<double>(predicted);
  r.recall = actual == 0 ? 0.0 : tp / static_cast<double>(actual);
  // Harmonic mean of Pr and Re, written as 2|D&P| / (|P| + |D|).
  r.f1 = true_positive == 0 ? 0.0 : 2.0 * tp / static_cast<double>(predicted + actual);
  return r;
}

/// D = ids that truly are positive, P = ids predicted positive.
template <typename Id>
PrecisionRecall f1(const std::set<Id>& gold_positive, const std::set<Id>& predicted_positive) {
  std::size_t tp = 0;
  for (const auto& id : predicted_positive) tp += gold_positive.count(id);
  return f1_from_counts(tp, predicted_positive.size(), gold_positive.size());
}

/// Position-aligned class indices.
inline PrecisionRecall f1(std::span<const int> gold, std::span<const int> predicted, int positive) {
  if (gold.size() != predicted.size()) {
    throw InvalidArgument("f1: " + std::to_string(gold.size()) + " gold labels vs " +
                          std::to_string(predicted.size()) + " predictions");
  }
  std::size_t tp = 0, p = 0, d = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool g = gold[i] == positive, q = predicted[i] == positive;
    tp += g && q;
    p += q;
    d += g;
  }
  return f1_from_counts(tp, p, d);
}

/// Unweighted mean of per-class F1 over classes [0, class_count).
inline double macro_f1(std::span<const int> gold, std::span<const int> predicted, int class_count) {
  if (class_count < 1) throw InvalidArgument("macro_f1: empty class set");
  double sum = 0.0;
  for (int c = 0; c < class_count; ++c) sum += f1(gold, predicted, c).f1;
  return sum / class_count;
}

/**
 * Labeler selection score: F1 of class 1 (the defect class) for binary
 * tasks, macro F1 otherwise.
 */
inline double task_f1(std::span<const int> gold, std::span<const int> predicted, int class_count) {
  return class_count == 2 ? f1(gold, predicted, 1).f1 : macro_f1(gold, predicted, class_count);
}

using LabelMap = std::map<std::string, std::string>;

namespace detail {

inline void require_same_ids(const LabelMap& gold, const LabelMap& predicted) {
  if (gold.size() != predicted.size()) {
    throw InvalidArgument("label sets differ in size: " + std::to_string(gold.size()) + " gold vs " +
                          std::to_string(predicted.size()) + " predicted");
  }
  for (auto g = gold.begin(), p = predicted.begin(); g != gold.end(); ++g, ++p) {
    if (g->first != p->first) {
      throw InvalidArgument("image id mismatch: gold has '" + g->first + "', predictions have '" +
                            p->first + "'");
    }
  }
}

}  // namespace detail

/// Id-keyed labels; both maps must hold the same ids.
inline PrecisionRecall f1(const LabelMap& gold, const LabelMap& predicted, const std::string& positive) {
  detail::require_same_ids(gold, predicted);
  std::set<std::string> d, p;
  for (const auto& [id, label] : gold)
    if (label == positive) d.insert(id);
  for (const auto& [id, label] : predicted)
    if (label == positive) p.insert(id);
  return f1(d, p);
}

inline double macro_f1(const LabelMap& gold, const LabelMap& predicted,
                       std::span<const std::string> classes) {
  if (classes.empty()) throw InvalidArgument("macro_f1: empty class set");
  double sum = 0.0;
  for (const auto& c : classes) sum += f1(gold, predicted, c).f1;
  return sum / static_cast<double>(classes.size());
}

}  // namespace gadget::eval

#endif  // GADGET_EVAL_METRICS_HPP
