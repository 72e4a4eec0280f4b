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

#ifndef GADGET_LABEL_MLP_HPP
#define GADGET_LABEL_MLP_HPP

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "gadget/core/error.hpp"
#include "gadget/core/rng.hpp"
#include "gadget/core/types.hpp"

namespace gadget::label {

using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Fully connected ReLU network with a softmax output layer.
struct MlpArchitecture {
  int inputs = 0;
  std::vector<int> hidden;
  int outputs = 0;

  void validate() const {
    if (inputs < 1) throw InvalidArgument("mlp: need at least one input");
    if (outputs < 2) throw InvalidArgument("mlp: need at least two output classes");
    for (int w : hidden) {
      if (w < 1) throw InvalidArgument("mlp: hidden width must be >= 1");
    }
  }

  /// Layer widths including input and output.
  std::vector<int> sizes() const {
    std::vector<int> s{inputs};
    s.insert(s.end(), hidden.begin(), hidden.end());
    s.push_back(outputs);
    return s;
  }

  std::size_t parameter_count() const {
    const auto s = sizes();
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < s.size(); ++l) {
      n += static_cast<std::size_t>(s[l + 1]) * (s[l] + 1);
    }
    return n;
  }

  /// e.g. "2x16"; "0x0" for no hidden layer.
  std::string name() const {
    if (hidden.empty()) return "0x0";
    return std::to_string(hidden.size()) + "x" + std::to_string(hidden.front());
  }

  bool operator==(const MlpArchitecture&) const = default;
};

/**
 * Flat parameter layout: for each layer, the weight matrix (out x in,
 * row-major) followed by the bias vector.
 */
struct LayerView {
  Eigen::Map<const RowMatrix> w;
  Eigen::Map<const Eigen::VectorXd> b;
};

inline std::vector<LayerView> layer_views(const MlpArchitecture& arch, std::span<const double> theta) {
  if (theta.size() != arch.parameter_count()) {
    throw InvalidArgument("mlp: expected " + std::to_string(arch.parameter_count()) +
                          " parameters, got " + std::to_string(theta.size()));
  }
  const auto s = arch.sizes();
  std::vector<LayerView> out;
  const double* p = theta.data();
  for (std::size_t l = 0; l + 1 < s.size(); ++l) {
    const int in = s[l], o = s[l + 1];
    out.push_back({Eigen::Map<const RowMatrix>(p, o, in), Eigen::Map<const Eigen::VectorXd>(p + o * in, o)});
    p += static_cast<std::size_t>(o) * (in + 1);
  }
  return out;
}

/// Glorot-uniform weights, zero biases.
inline std::vector<double> glorot_init(const MlpArchitecture& arch, Rng& rng) {
  arch.validate();
  const auto s = arch.sizes();
  std::vector<double> theta;
  theta.reserve(arch.parameter_count());
  for (std::size_t l = 0; l + 1 < s.size(); ++l) {
    const double bound = std::sqrt(6.0 / (s[l] + s[l + 1]));
    for (int i = 0; i < s[l + 1] * s[l]; ++i) theta.push_back(rng.uniform(-bound, bound));
    for (int i = 0; i < s[l + 1]; ++i) theta.push_back(0.0);
  }
  return theta;
}

/// Row-wise softmax in place.
inline void softmax_rows(Matrix& z) {
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const double mx = z.row(i).maxCoeff();
    z.row(i) = (z.row(i).array() - mx).exp();
    z.row(i) /= z.row(i).sum();
  }
}

/// Class probabilities, one row per sample of `x` (samples x inputs).
inline Matrix mlp_forward(const MlpArchitecture& arch, std::span<const double> theta, const Matrix& x) {
  if (x.cols() != arch.inputs) {
    throw InvalidArgument("mlp: expected " + std::to_string(arch.inputs) + " features, got " +
                          std::to_string(x.cols()));
  }
  const auto layers = layer_views(arch, theta);
  Matrix a = x;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Matrix z = a * layers[l].w.transpose();
    z.rowwise() += layers[l].b.transpose();
    if (l + 1 < layers.size()) {
      a = z.cwiseMax(0.0);
    } else {
      softmax_rows(z);
      a = std::move(z);
    }
  }
  return a;
}

/**
 * Mean softmax cross-entropy plus 0.5 * l2 * sum(W^2) / n over weight
 * matrices (biases unpenalized). Writes the gradient when `grad` is
 * non-empty.
 */
inline double mlp_loss_grad(const MlpArchitecture& arch, std::span<const double> theta, const Matrix& x,
                            std::span<const int> y, double l2, std::span<double> grad) {
  const auto n = x.rows();
  if (n < 1) throw InvalidArgument("mlp: empty batch");
  if (static_cast<std::size_t>(n) != y.size()) throw InvalidArgument("mlp: label count mismatch");
  if (x.cols() != arch.inputs) {
    throw InvalidArgument("mlp: expected " + std::to_string(arch.inputs) + " features, got " +
                          std::to_string(x.cols()));
  }
  const auto layers = layer_views(arch, theta);
  const std::size_t L = layers.size();
  std::vector<Matrix> acts{x};  // acts[l] = input of layer l
  acts.reserve(L + 1);
  for (std::size_t l = 0; l < L; ++l) {
    Matrix z = acts[l] * layers[l].w.transpose();
    z.rowwise() += layers[l].b.transpose();
    if (l + 1 < L) {
      acts.push_back(z.cwiseMax(0.0));
    } else {
      softmax_rows(z);
      acts.push_back(std::move(z));
    }
  }
  const Matrix& prob = acts[L];
  const double inv_n = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int c = y[static_cast<std::size_t>(i)];
    if (c < 0 || c >= arch.outputs) throw InvalidArgument("mlp: label out of range");
    loss -= std::log(std::max(prob(i, c), 1e-300));
  }
  loss *= inv_n;
  double wsq = 0.0;
  for (const auto& lv : layers) wsq += lv.w.squaredNorm();
  loss += 0.5 * l2 * wsq * inv_n;
  if (grad.empty()) return loss;
  if (grad.size() != theta.size()) throw InvalidArgument("mlp: gradient buffer size mismatch");

  Matrix delta = prob;
  for (Eigen::Index i = 0; i < n; ++i) delta(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  delta *= inv_n;
  // Parameter offsets per layer.
  const auto s = arch.sizes();
  std::vector<std::size_t> offset(L);
  std::size_t off = 0;
  for (std::size_t l = 0; l < L; ++l) {
    offset[l] = off;
    off += static_cast<std::size_t>(s[l + 1]) * (s[l] + 1);
  }
  for (std::size_t l = L; l-- > 0;) {
    const int in = s[l], o = s[l + 1];
    Eigen::Map<RowMatrix> gw(grad.data() + offset[l], o, in);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + offset[l] + static_cast<std::size_t>(o) * in, o);
    gw.noalias() = delta.transpose() * acts[l];
    gw += (l2 * inv_n) * layers[l].w;
    gb = delta.colwise().sum().transpose();
    if (l > 0) {
      Matrix back = delta * layers[l].w;
      delta = back.cwiseProduct((acts[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return loss;
}

/// Per-column affine map to zero mean, unit variance. Constant columns keep
/// scale 1.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    const auto n = static_cast<double>(x.rows());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double m = x.col(j).sum() / n;
      const double var = (x.col(j).array() - m).square().sum() / n;
      s.mean.push_back(m);
      s.scale.push_back(var > 0.0 ? std::sqrt(var) : 1.0);
    }
    return s;
  }

  /// Indices of columns with zero variance at fit time.
  std::vector<std::size_t> constant_columns(const Matrix& x) const {
    std::vector<std::size_t> out;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if ((x.col(j).array() == x(0, j)).all()) out.push_back(static_cast<std::size_t>(j));
    }
    return out;
  }

  Matrix apply(const Matrix& x) const {
    if (static_cast<std::size_t>(x.cols()) != mean.size()) {
      throw InvalidArgument("standardizer: expected " + std::to_string(mean.size()) + " features, got " +
                            std::to_string(x.cols()));
    }
    Matrix out(x.rows(), x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      out.col(j) = (x.col(j).array() - mean[static_cast<std::size_t>(j)]) / scale[static_cast<std::size_t>(j)];
    }
    return out;
  }

  bool operator==(const Standardizer&) const = default;
};

/// Rows of `x` in `rows` order.
inline Matrix select_rows(const Matrix& x, std::span<const std::size_t> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
  return out;
}

inline Matrix to_matrix(std::span<const FeatureVector> features) {
  if (features.empty()) return Matrix(0, 0);
  const auto cols = features.front().values.size();
  Matrix m(static_cast<Eigen::Index>(features.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (features[i].values.size() != cols) {
      throw InvalidArgument("feature vector '" + features[i].image_id + "' has " +
                            std::to_string(features[i].values.size()) + " values, expected " +
                            std::to_string(cols));
    }
    for (std::size_t j = 0; j < cols; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = features[i].values[j];
  }
  return m;
}

/// A trained labeler: architecture, parameters and input normalization.
struct MlpModel {
  MlpArchitecture arch;
  std::vector<std::string> classes;
  std::vector<std::string> feature_names;
  Standardizer standardizer;
  std::vector<double> theta;
  int iterations = 0;

  Matrix probabilities(const Matrix& raw) const { return mlp_forward(arch, theta, standardizer.apply(raw)); }

  bool operator==(const MlpModel&) const = default;
};

/// Softmax probabilities and argmax class per feature vector.
inline std::vector<WeakLabel> predict(const MlpModel& model, std::span<const FeatureVector> features) {
  for (const auto& f : features) {
    if (f.values.size() != static_cast<std::size_t>(model.arch.inputs)) {
      throw InvalidArgument("feature length mismatch for '" + f.image_id + "': expected " +
                            std::to_string(model.arch.inputs) + ", got " + std::to_string(f.values.size()));
    }
  }
  std::vector<WeakLabel> out;
  out.reserve(features.size());
  if (features.empty()) return out;
  // One row at a time so each result is independent of batch composition.
  for (const auto& f : features) {
    const Matrix prob = model.probabilities(to_matrix(std::span<const FeatureVector>(&f, 1)));
    std::vector<double> p(prob.data(), prob.data() + prob.size());
    out.push_back(make_weak_label(f.image_id, model.classes, std::move(p)));
  }
  return out;
}

/// Class index per row (lowest index on ties).
inline std::vector<int> predict_classes(const MlpArchitecture& arch, std::span<const double> theta, const Matrix& x) {
  const Matrix prob = mlp_forward(arch, theta, x);
  std::vector<int> out(static_cast<std::size_t>(prob.rows()));
  for (Eigen::Index i = 0; i < prob.rows(); ++i) {
    int best = 0;
    for (Eigen::Index c = 1; c < prob.cols(); ++c) {
      if (prob(i, c) > prob(i, best)) best = static_cast<int>(c);
    }
    out[static_cast<std::size_t>(i)] = best;
  }
  return out;
}

}  // namespace gadget::label

#endif  // GADGET_LABEL_MLP_HPP
