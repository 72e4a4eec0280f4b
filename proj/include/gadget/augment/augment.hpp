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

#ifndef GADGET_AUGMENT_AUGMENT_HPP
#define GADGET_AUGMENT_AUGMENT_HPP

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gadget/augment/policy_search.hpp"
#include "gadget/augment/rgan.hpp"
#include "gadget/core/log.hpp"
#include "gadget/core/parallel.hpp"

namespace gadget::augment {

enum class AugmentMode { None, Policy, Gan, Both };

inline std::string_view to_string(AugmentMode m) {
  switch (m) {
    case AugmentMode::None: return "none";
    case AugmentMode::Policy: return "policy";
    case AugmentMode::Gan: return "gan";
    case AugmentMode::Both: return "both";
  }
  return "?";
}

inline AugmentMode parse_augment_mode(std::string_view s) {
  for (auto m : {AugmentMode::None, AugmentMode::Policy, AugmentMode::Gan, AugmentMode::Both}) {
    if (to_string(m) == s) return m;
  }
  throw InvalidArgument("augment mode must be none|policy|gan|both, got '" + std::string(s) + "'");
}

inline bool uses_policy(AugmentMode m) { return m == AugmentMode::Policy || m == AugmentMode::Both; }
inline bool uses_gan(AugmentMode m) { return m == AugmentMode::Gan || m == AugmentMode::Both; }

struct AugmentConfig {
  AugmentMode mode = AugmentMode::Both;
  /// Augmented patterns per mode, per class.
  std::size_t budget = 300;
  std::vector<Policy> candidates = default_policies();
  PolicySearchConfig search;
  GanConfig gan;
  int jobs = 1;
};

struct AugmentResult {
  /// Originals first, then policy patterns, then GAN patterns.
  std::vector<Pattern> patterns;
  std::optional<PolicyCombo> combo;
  std::map<std::string, std::vector<double>> gan_d_loss;
};

/// Patterns grouped by class, classes in sorted order.
inline std::map<std::string, std::vector<Pattern>> by_class(std::span<const Pattern> patterns) {
  std::map<std::string, std::vector<Pattern>> out;
  for (const auto& p : patterns) out[p.defect_class].push_back(p);
  return out;
}

/// One generator per class; classes with fewer than 2 patterns are skipped
/// with a warning.
inline std::vector<Pattern> gan_augment(std::span<const Pattern> patterns, std::size_t budget, const GanConfig& cfg,
                                        Rng& rng, int jobs, std::map<std::string, std::vector<double>>* losses = nullptr) {
  const auto groups = by_class(patterns);
  std::vector<std::pair<std::string, std::vector<Pattern>>> work(groups.begin(), groups.end());
  std::vector<std::vector<Pattern>> generated(work.size());
  std::vector<std::vector<double>> d_loss(work.size());
  std::vector<std::uint64_t> streams;
  for (std::size_t i = 0; i < work.size(); ++i) streams.push_back(rng.child(500 + i).next_u64());
  parallel_for(work.size(), jobs, [&](std::size_t i) {
    const auto& [cls, ps] = work[i];
    if (ps.size() < 2 || budget == 0) return;
    Rng r(streams[i]);
    Rng train_rng = r.child(1);
    auto trained = train_rgan(ps, cfg, train_rng);
    std::vector<Size> sizes;
    for (const auto& p : ps) sizes.push_back(p.pixels.size());
    Rng gen_rng = r.child(2);
    generated[i] = generate_gan_patterns(trained.generator, budget, sizes, gen_rng, cls, "gan-" + cls + "-");
    d_loss[i] = std::move(trained.d_loss);
  });
  std::vector<Pattern> out;
  for (std::size_t i = 0; i < work.size(); ++i) {
    if (work[i].second.size() < 2 && budget > 0) {
      log_warning("gan: class '" + work[i].first + "' has fewer than 2 patterns; skipped");
    }
    if (losses && !d_loss[i].empty()) (*losses)[work[i].first] = std::move(d_loss[i]);
    for (auto& p : generated[i]) out.push_back(std::move(p));
  }
  return out;
}

/**
 * Original patterns plus up to `budget` augmented patterns per mode and
 * class. Policy mode searches a combo on `dev` unless `preset` is given.
 */
inline AugmentResult augment(std::span<const Pattern> patterns, std::span<const LabeledImage> dev,
                             std::span<const std::string> classes, const AugmentConfig& cfg, Rng& rng,
                             const PolicyCombo* preset = nullptr) {
  if (patterns.empty()) throw InvalidArgument("augment: no patterns");
  AugmentResult r;
  r.patterns.assign(patterns.begin(), patterns.end());
  if (uses_policy(cfg.mode)) {
    if (preset) {
      r.combo = *preset;
    } else {
      Rng search_rng = rng.child(10);
      PolicySearchConfig scfg = cfg.search;
      scfg.jobs = cfg.jobs;
      r.combo = search_policy_combo(patterns, dev, classes, cfg.candidates, search_rng, scfg);
    }
    Rng apply_rng = rng.child(11);
    for (auto& p : apply_combo(patterns, *r.combo, cfg.budget, apply_rng)) r.patterns.push_back(std::move(p));
  }
  if (uses_gan(cfg.mode)) {
    Rng gan_rng = rng.child(12);
    for (auto& p : gan_augment(patterns, cfg.budget, cfg.gan, gan_rng, cfg.jobs, &r.gan_d_loss)) {
      r.patterns.push_back(std::move(p));
    }
  }
  return r;
}

}  // namespace gadget::augment

#endif  // GADGET_AUGMENT_AUGMENT_HPP
