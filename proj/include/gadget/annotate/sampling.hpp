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

#ifndef GADGET_ANNOTATE_SAMPLING_HPP
#define GADGET_ANNOTATE_SAMPLING_HPP

#include <optional>
#include <set>
#include <string>

#include "gadget/core/error.hpp"
#include "gadget/core/rng.hpp"
#include "gadget/core/types.hpp"
#include "gadget/store/manifest.hpp"

namespace gadget::annotate {

class ExhaustedPool : public Conflict {
 public:
  ExhaustedPool(std::size_t annotated, std::size_t defects, std::size_t threshold)
      : Conflict("image pool exhausted: all " + std::to_string(annotated) + " images annotated with " +
                 std::to_string(defects) + " defective, threshold " + std::to_string(threshold)),
        annotated_(annotated),
        defects_(defects),
        threshold_(threshold) {}

  std::size_t annotated() const noexcept { return annotated_; }
  std::size_t defects() const noexcept { return defects_; }
  std::size_t threshold() const noexcept { return threshold_; }

 private:
  std::size_t annotated_, defects_, threshold_;
};

/**
 * Uniformly random image (manifest order, one rng.index draw) among those
 * neither in the development set nor in `exclude`; nullopt (done) once the
 * development set holds `defect_threshold` defective images.
 */
inline std::optional<std::string> next_image_to_annotate(const store::DatasetManifest& manifest,
                                                         const DevelopmentSet& dev, std::size_t defect_threshold,
                                                         Rng& rng, const std::set<std::string>& exclude = {}) {
  if (defect_threshold < 1) throw InvalidArgument("defect threshold must be >= 1");
  if (dev.defect_count() >= defect_threshold) return std::nullopt;
  std::vector<const std::string*> pool;
  for (const auto& r : manifest.images) {
    if (!dev.contains(r.id) && !exclude.contains(r.id)) pool.push_back(&r.id);
  }
  if (pool.empty()) throw ExhaustedPool(manifest.images.size(), dev.defect_count(), defect_threshold);
  return *pool[rng.index(pool.size())];
}

}  // namespace gadget::annotate

#endif  // GADGET_ANNOTATE_SAMPLING_HPP
