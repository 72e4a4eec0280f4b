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

// Cuts a pattern out of a synthetic defect image and finds it again with
// exhaustive and pyramid matching.

#include <cstdio>

#include "gadget/eval/synth.hpp"
#include "gadget/match/pyramid.hpp"

using namespace gadget;

int main() {
  eval::SynthSpec spec;
  spec.count = 20;
  spec.defect_rate = 0.5;
  spec.width = 128;
  spec.height = 128;
  spec.seed = 7;
  const auto ds = eval::synth_dataset(spec);
  for (const auto& im : ds.images) {
    if (im.boxes.empty()) continue;
    const BoundingBox& b = im.boxes.front().box;
    const GrayImage pattern = im.image.crop(b.x0, b.y0, b.x1, b.y1);
    const auto ex = match::match_exhaustive(im.image, pattern);
    const auto py = match::match_pyramid(im.image, pattern);
    std::printf("%s: %dx%d pattern at (%d, %d)\n", im.id.c_str(), pattern.width(), pattern.height(), b.x0, b.y0);
    std::printf("  exhaustive %.4f at (%d, %d)\n", ex.similarity, ex.x, ex.y);
    std::printf("  pyramid    %.4f at (%d, %d)\n", py.similarity, py.x, py.y);
    // The same pattern against a defect-free image scores lower.
    for (const auto& other : ds.images) {
      if (!other.boxes.empty()) continue;
      std::printf("  on %s (no defect) %.4f\n", other.id.c_str(), match::match_pyramid(other.image, pattern).similarity);
      break;
    }
    break;
  }
  return 0;
}
