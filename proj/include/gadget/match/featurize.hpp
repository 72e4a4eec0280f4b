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

#ifndef GADGET_MATCH_FEATURIZE_HPP
#define GADGET_MATCH_FEATURIZE_HPP

#include <deque>
#include <span>
#include <string>
#include <vector>

#include "gadget/core/log.hpp"
#include "gadget/core/parallel.hpp"
#include "gadget/core/types.hpp"
#include "gadget/match/pyramid.hpp"

namespace gadget::match {

struct ImageRef {
  std::string id;
  const GrayImage* image = nullptr;
};

/**
 * One FeatureVector per image; value i is the best pattern-i similarity.
 * Column order is the order of `patterns`. Patterns wider or taller than an
 * image contribute 0 for that image with a warning. Output is identical for
 * every `jobs` value.
 */
inline std::vector<FeatureVector> featurize(std::span<const ImageRef> images,
                                            std::span<const Pattern> patterns,
                                            const PyramidConfig& config = {}, int jobs = 1) {
  config.validate();
  std::vector<PreparedPattern> prepared;
  prepared.reserve(patterns.size());
  for (const auto& p : patterns) {
    prepared.emplace_back(p.pixels, config.factor);
    if (config.levels > 1) prepared.back().ensure_levels(config.levels);
  }
  std::vector<FeatureVector> out(images.size());
  std::vector<std::vector<std::string>> warnings(images.size());
  parallel_for(images.size(), jobs, [&](std::size_t i) {
    const GrayImage& img = *images[i].image;
    PreparedImage pimg(img, config.factor);
    out[i].image_id = images[i].id;
    out[i].values.assign(patterns.size(), 0.0);
    for (std::size_t p = 0; p < patterns.size(); ++p) {
      if (patterns[p].width() > img.width() || patterns[p].height() > img.height()) {
        warnings[i].push_back("pattern '" + patterns[p].id + "' is larger than image '" +
                              images[i].id + "'; feature set to 0");
        continue;
      }
      out[i].values[p] = match_prepared(pimg, prepared[p], config).similarity;
    }
  });
  for (const auto& w : warnings) {
    for (const auto& msg : w) log_warning(msg);
  }
  return out;
}

inline std::vector<FeatureVector> featurize(std::span<const std::pair<std::string, GrayImage>> images,
                                            std::span<const Pattern> patterns,
                                            const PyramidConfig& config = {}, int jobs = 1) {
  std::vector<ImageRef> refs;
  refs.reserve(images.size());
  for (const auto& [id, img] : images) refs.push_back({id, &img});
  return featurize(std::span<const ImageRef>(refs), patterns, config, jobs);
}

}  // namespace gadget::match

#endif  // GADGET_MATCH_FEATURIZE_HPP
