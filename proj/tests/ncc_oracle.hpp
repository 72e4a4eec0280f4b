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

#ifndef GADGET_TESTS_NCC_ORACLE_HPP
#define GADGET_TESTS_NCC_ORACLE_HPP

// Straight transcription of the matching formula: one placement at a time,
// sums accumulated row-major over the pattern. Independent of the library's
// row-vectorized kernels.

#include <algorithm>
#include <cmath>

#include "gadget/core/types.hpp"
#include "gadget/match/ncc.hpp"

namespace gadget::fixture {

inline double oracle_ncc(const GrayImage& image, const GrayImage& pattern, int x, int y) {
  double pe = 0.0;
  for (int py = 0; py < pattern.height(); ++py)
    for (int px = 0; px < pattern.width(); ++px) pe += pattern.at(px, py) * pattern.at(px, py);
  double num = 0.0, win = 0.0;
  for (int py = 0; py < pattern.height(); ++py) {
    for (int px = 0; px < pattern.width(); ++px) {
      const double iv = image.at(x + px, y + py);
      num += pattern.at(px, py) * iv;
      win += iv * iv;
    }
  }
  if (pe == 0.0 || win == 0.0) return 0.0;
  return std::min(1.0, std::abs(num) / std::sqrt(pe * win));
}

inline match::MatchResult oracle_match(const GrayImage& image, const GrayImage& pattern) {
  match::MatchResult best{-1.0, 0, 0};
  for (int y = 0; y + pattern.height() <= image.height(); ++y) {
    for (int x = 0; x + pattern.width() <= image.width(); ++x) {
      const double v = oracle_ncc(image, pattern, x, y);
      if (v > best.similarity) best = {v, x, y};
    }
  }
  return best;
}

}  // namespace gadget::fixture

#endif  // GADGET_TESTS_NCC_ORACLE_HPP
