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

#ifndef GADGET_LABEL_TRAIN_HPP
#define GADGET_LABEL_TRAIN_HPP

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gadget/core/error.hpp"
#include "gadget/core/log.hpp"
#include "gadget/core/parallel.hpp"
#include "gadget/core/rng.hpp"
#include "gadget/eval/metrics.hpp"
#include "gadget/label/folds.hpp"
#include "gadget/label/lbfgs.hpp"
#include "gadget/label/mlp.hpp"

namespace gadget::label {

struct TrainConfig {
  /// Initial L-BFGS step length.
  double learning_rate = 1e-5;
  double l2 = 1e-4;
  int max_iterations = 500;
  int patience = 10;
  int history = 10;
  /// Relative validation-loss decrease that counts as progress at equal F1.
  double loss_tolerance = 1e-3;
  FoldConfig folds;
  std::uint64_t seed = 0;
  /// Threads for architecture-grid evaluation.
  int jobs = 1;

  void validate() const {
    if (!(learning_rate > 0)) throw InvalidArgument("train: learning_rate must be > 0");
    if (!(l2 >= 0)) throw InvalidArgument("train: l2 must be >= 0");
    if (max_iterations < 1) throw InvalidArgument("train: max_iterations must be >= 1");
    if (patience < 1) throw InvalidArgument("train: patience must be >= 1");
    if (history < 1) throw InvalidArgument("train: history must be >= 1");
  }

  LbfgsOptions lbfgs() const {
    LbfgsOptions o;
    o.history = history;
    o.initial_step = learning_rate;
    return o;
  }
};

namespace detail {

class Objective {
 public:
  Objective(const MlpArchitecture& arch, const Matrix& x, std::span<const int> y, double l2)
      : arch_(arch), x_(x), y_(y), l2_(l2) {}

  double operator()(const Vector& theta, Vector& grad) const {
    grad.resize(theta.size());
    return mlp_loss_grad(arch_, std::span<const double>(theta.data(), static_cast<std::size_t>(theta.size())),
                         x_, y_, l2_, std::span<double>(grad.data(), static_cast<std::size_t>(grad.size())));
  }

 private:
  const MlpArchitecture& arch_;
  const Matrix& x_;
  std::span<const int> y_;
  double l2_;
};

inline Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }
inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline void check_progress(const Lbfgs& opt) {
  if (!std::isfinite(opt.value())) throw NumericError("labeler training: non-finite loss");
}

}  // namespace detail

struct EarlyStopResult {
  std::vector<double> theta;
  int best_iteration = 0;
  double best_f1 = 0.0;
  int iterations_run = 0;
};

/**
 * L-BFGS on standardized inputs, scoring the validation split after every
 * iteration. An iteration improves on the best so far when its F1 is
 * higher, or equal with a validation loss lower by at least
 * `loss_tolerance` (relative). Stops after `patience` iterations without
 * improvement and returns the parameters from the best iteration.
 */
inline EarlyStopResult fit_early_stopping(const MlpArchitecture& arch, const Matrix& x_train,
                                          std::span<const int> y_train, const Matrix& x_val,
                                          std::span<const int> y_val, const TrainConfig& cfg, Rng& rng) {
  const detail::Objective obj(arch, x_train, y_train, cfg.l2);
  Lbfgs opt(cfg.lbfgs());
  opt.start(obj, detail::to_vector(glorot_init(arch, rng)));
  auto view = [](const Vector& t) { return std::span<const double>(t.data(), static_cast<std::size_t>(t.size())); };
  auto f1_of = [&](const Vector& theta) {
    return eval::task_f1(y_val, predict_classes(arch, view(theta), x_val), arch.outputs);
  };
  auto loss_of = [&](const Vector& theta) { return mlp_loss_grad(arch, view(theta), x_val, y_val, 0.0, {}); };
  EarlyStopResult r;
  r.theta = detail::to_std(opt.x());
  r.best_f1 = f1_of(opt.x());
  double best_loss = loss_of(opt.x());
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const LbfgsStatus st = opt.step(obj);
    detail::check_progress(opt);
    if (st == LbfgsStatus::LineSearchFailed) break;
    r.iterations_run = it;
    const double f = f1_of(opt.x());
    const double loss = loss_of(opt.x());
    if (f > r.best_f1 || (f == r.best_f1 && loss < best_loss * (1.0 - cfg.loss_tolerance))) {
      r.best_f1 = f;
      best_loss = loss;
      r.best_iteration = it;
      r.theta = detail::to_std(opt.x());
    }
    if (st == LbfgsStatus::Converged || it - r.best_iteration >= cfg.patience) break;
  }
  return r;
}

/// Up to `iterations` L-BFGS iterations (fewer if it converges).
inline std::vector<double> fit_fixed(const MlpArchitecture& arch, const Matrix& x, std::span<const int> y,
                                     int iterations, const TrainConfig& cfg, Rng& rng) {
  const detail::Objective obj(arch, x, y, cfg.l2);
  Lbfgs opt(cfg.lbfgs());
  opt.start(obj, detail::to_vector(glorot_init(arch, rng)));
  for (int it = 0; it < iterations; ++it) {
    const LbfgsStatus st = opt.step(obj);
    detail::check_progress(opt);
    if (st != LbfgsStatus::Progress) break;
  }
  return detail::to_std(opt.x());
}

struct TrainResult {
  MlpModel model;
  double cv_f1 = 0.0;
  std::vector<double> fold_f1;
  std::vector<int> stop_iterations;
};

inline int median_iterations(std::vector<int> v) {
  if (v.empty()) return 1;
  std::sort(v.begin(), v.end());
  return std::max(1, v[(v.size() - 1) / 2]);
}

/**
 * Cross-validated training: one early-stopped run per fold, then a final
 * model on all rows for the (lower) median best-iteration count. Inputs are
 * raw feature rows; standardization is fitted per run and stored in the
 * model.
 */
inline TrainResult train_mlp(const MlpArchitecture& arch, const Matrix& x, std::span<const int> y,
                             std::span<const std::string> classes, std::span<const Fold> folds,
                             const TrainConfig& cfg, std::vector<std::string> feature_names = {}) {
  cfg.validate();
  arch.validate();
  if (static_cast<std::size_t>(arch.outputs) != classes.size()) {
    throw InvalidArgument("train: architecture has " + std::to_string(arch.outputs) + " outputs for " +
                          std::to_string(classes.size()) + " classes");
  }
  if (x.cols() != arch.inputs) {
    throw InvalidArgument("train: expected " + std::to_string(arch.inputs) + " features, got " +
                          std::to_string(x.cols()));
  }
  if (folds.empty()) throw InvalidArgument("train: no folds");
  // Every fold run and the final retrain start from the same weights, so
  // the median stopping iteration transfers to the retrain.
  const Rng init = Rng(cfg.seed).child(0);
  TrainResult out;
  for (std::size_t f = 0; f < folds.size(); ++f) {
    const Matrix xtr_raw = select_rows(x, folds[f].train);
    const Standardizer st = Standardizer::fit(xtr_raw);
    std::vector<int> ytr, yva;
    for (std::size_t i : folds[f].train) ytr.push_back(y[i]);
    for (std::size_t i : folds[f].validation) yva.push_back(y[i]);
    Rng rng = init;
    const auto r = fit_early_stopping(arch, st.apply(xtr_raw), ytr, st.apply(select_rows(x, folds[f].validation)),
                                      yva, cfg, rng);
    out.fold_f1.push_back(r.best_f1);
    out.stop_iterations.push_back(r.best_iteration);
  }
  double sum = 0.0;
  for (double v : out.fold_f1) sum += v;
  out.cv_f1 = sum / static_cast<double>(out.fold_f1.size());

  const int iterations = median_iterations(out.stop_iterations);
  MlpModel& m = out.model;
  m.arch = arch;
  m.classes.assign(classes.begin(), classes.end());
  m.feature_names = std::move(feature_names);
  m.standardizer = Standardizer::fit(x);
  Rng rng = init;
  m.theta = fit_fixed(arch, m.standardizer.apply(x), y, iterations, cfg, rng);
  m.iterations = iterations;
  return out;
}

/// Widths {2^n | n = 1..m} with m the smallest value satisfying
/// 2^(m-1) <= inputs <= 2^m (and m >= 1).
inline std::vector<int> width_grid(int inputs) {
  if (inputs < 1) throw InvalidArgument("width grid: need at least one input");
  int m = 1;
  while ((1LL << m) < inputs) ++m;
  std::vector<int> w;
  for (int n = 1; n <= m; ++n) w.push_back(1 << n);
  return w;
}

/// Hidden-layer counts 1..max_layers crossed with width_grid, uniform width,
/// ordered by layer count then width.
inline std::vector<MlpArchitecture> architecture_grid(int inputs, int outputs, int max_layers = 3) {
  std::vector<MlpArchitecture> grid;
  for (int layers = 1; layers <= max_layers; ++layers) {
    for (int w : width_grid(inputs)) grid.push_back({inputs, std::vector<int>(static_cast<std::size_t>(layers), w), outputs});
  }
  return grid;
}

struct ArchScore {
  MlpArchitecture arch;
  double cv_f1 = 0.0;
};

struct TuneResult {
  MlpArchitecture best;
  double cv_f1 = 0.0;
  MlpModel model;
  std::vector<ArchScore> scores;
  /// Final model per grid entry, filled when requested.
  std::vector<MlpModel> models;
};

struct TuneOptions {
  /// Defaults to architecture_grid(inputs, classes).
  std::optional<std::vector<MlpArchitecture>> grid;
  bool keep_models = false;
};

/// Warns about feature columns that are constant over the training rows.
inline void warn_constant_columns(const Matrix& x, std::span<const std::string> names) {
  if (x.rows() == 0) return;
  for (std::size_t j : Standardizer{}.constant_columns(x)) {
    const std::string name = j < names.size() ? names[j] : "#" + std::to_string(j);
    log_warning("feature column '" + name + "' has zero variance on the development set");
  }
}

/**
 * Evaluates every architecture with the same seeded folds and returns the
 * best by cross-validated F1; ties go to the earlier grid entry (fewer
 * layers, then smaller width).
 */
inline TuneResult tune(const Matrix& x, std::span<const int> y, std::span<const std::string> classes,
                       const TrainConfig& cfg, std::vector<std::string> feature_names = {},
                       const TuneOptions& opts = {}) {
  cfg.validate();
  const auto grid = opts.grid ? *opts.grid
                              : architecture_grid(static_cast<int>(x.cols()), static_cast<int>(classes.size()));
  if (grid.empty()) throw InvalidArgument("tune: empty architecture grid");
  Rng fold_rng = Rng(cfg.seed).child(0x666f6c64);
  const auto folds = make_folds(y, classes, fold_rng, cfg.folds);
  warn_constant_columns(x, feature_names);
  std::vector<TrainResult> results(grid.size());
  parallel_for(grid.size(), cfg.jobs, [&](std::size_t i) {
    results[i] = train_mlp(grid[i], x, y, classes, folds, cfg, feature_names);
  });
  TuneResult out;
  std::size_t best = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.scores.push_back({grid[i], results[i].cv_f1});
    if (results[i].cv_f1 > results[best].cv_f1) best = i;
  }
  out.best = grid[best];
  out.cv_f1 = results[best].cv_f1;
  out.model = results[best].model;
  if (opts.keep_models) {
    for (auto& r : results) out.models.push_back(std::move(r.model));
  }
  return out;
}

/// Maps class names to indices in `classes`.
inline std::vector<int> encode_labels(std::span<const std::string> labels, std::span<const std::string> classes) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) {
    const auto it = std::find(classes.begin(), classes.end(), l);
    if (it == classes.end()) throw InvalidArgument("label '" + l + "' is not in the class set");
    out.push_back(static_cast<int>(it - classes.begin()));
  }
  return out;
}

}  // namespace gadget::label

#endif  // GADGET_LABEL_TRAIN_HPP
