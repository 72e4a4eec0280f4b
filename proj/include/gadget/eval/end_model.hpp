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

#ifndef GADGET_EVAL_END_MODEL_HPP
#define GADGET_EVAL_END_MODEL_HPP

#include <span>
#include <string>
#include <vector>

#include "gadget/eval/metrics.hpp"
#include "gadget/label/train.hpp"

namespace gadget::eval {

/**
 * Stand-in for the downstream image classifier that consumes weak labels:
 * a fixed high-pass filter (|pixel - 5x5 box mean|), max-pooled over a
 * cells x cells grid, feeding a one-hidden-layer MLP trained for a fixed
 * number of L-BFGS iterations. Minority classes are replicated up to the
 * majority count (at most `max_replication` times) so scarce defects are
 * not ignored.
 */
struct EndModelConfig {
  int cells = 8;
  int hidden = 32;
  int iterations = 150;
  double l2 = 1e-3;
  int max_replication = 20;

  void validate() const {
    if (cells < 1 || hidden < 1 || iterations < 1 || max_replication < 1) {
      throw InvalidArgument("end model: cells, hidden, iterations and max_replication must be >= 1");
    }
  }
};

inline std::vector<double> end_model_features(const GrayImage& img, int cells) {
  const int w = img.width(), h = img.height();
  // Summed-area table for the box mean.
  std::vector<double> sat(static_cast<std::size_t>(w + 1) * (h + 1), 0.0);
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      row += img.at(x, y);
      sat[static_cast<std::size_t>(y + 1) * (w + 1) + x + 1] = sat[static_cast<std::size_t>(y) * (w + 1) + x + 1] + row;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(cells) * cells, 0.0);
  for (int y = 0; y < h; ++y) {
    const int ya = std::max(0, y - 2), yb = std::min(h, y + 3);
    for (int x = 0; x < w; ++x) {
      const int xa = std::max(0, x - 2), xb = std::min(w, x + 3);
      const auto at = [&](int xx, int yy) { return sat[static_cast<std::size_t>(yy) * (w + 1) + xx]; };
      const double mean = (at(xb, yb) - at(xa, yb) - at(xb, ya) + at(xa, ya)) / ((xb - xa) * (yb - ya));
      const double r = std::abs(img.at(x, y) - mean);
      double& cell = out[static_cast<std::size_t>(y * cells / h) * cells + x * cells / w];
      cell = std::max(cell, r);
    }
  }
  return out;
}

inline label::Matrix end_model_matrix(std::span<const GrayImage* const> images, int cells) {
  label::Matrix x(static_cast<Eigen::Index>(images.size()), static_cast<Eigen::Index>(cells) * cells);
  for (std::size_t i = 0; i < images.size(); ++i) {
    const auto f = end_model_features(*images[i], cells);
    for (std::size_t j = 0; j < f.size(); ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f[j];
  }
  return x;
}

/// Trains on (x_train, y_train) and returns the task F1 on (x_test, y_test).
inline double end_model_f1(const label::Matrix& x_train, std::span<const int> y_train, const label::Matrix& x_test,
                           std::span<const int> y_test, int class_count, const EndModelConfig& cfg, Rng& rng) {
  cfg.validate();
  std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
  for (int c : y_train) ++counts[static_cast<std::size_t>(c)];
  const std::size_t most = *std::max_element(counts.begin(), counts.end());
  std::vector<std::size_t> rows;
  std::vector<int> y;
  for (std::size_t i = 0; i < y_train.size(); ++i) {
    const std::size_t n = counts[static_cast<std::size_t>(y_train[i])];
    const std::size_t rep = std::clamp<std::size_t>(most / std::max<std::size_t>(n, 1), 1, static_cast<std::size_t>(cfg.max_replication));
    for (std::size_t r = 0; r < rep; ++r) {
      rows.push_back(i);
      y.push_back(y_train[i]);
    }
  }
  const label::Matrix xr = label::select_rows(x_train, rows);
  const label::Standardizer st = label::Standardizer::fit(xr);
  const label::MlpArchitecture arch{static_cast<int>(x_train.cols()), {cfg.hidden}, class_count};
  label::TrainConfig tcfg;
  tcfg.l2 = cfg.l2;
  const auto theta = label::fit_fixed(arch, st.apply(xr), y, cfg.iterations, tcfg, rng);
  return task_f1(y_test, label::predict_classes(arch, theta, st.apply(x_test)), class_count);
}

}  // namespace gadget::eval

#endif  // GADGET_EVAL_END_MODEL_HPP
