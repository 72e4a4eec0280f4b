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

#ifndef GADGET_LABEL_MODEL_IO_HPP
#define GADGET_LABEL_MODEL_IO_HPP

#include <filesystem>
#include <string>
#include <vector>

#include "gadget/core/json.hpp"
#include "gadget/label/mlp.hpp"
#include "gadget/store/manifest.hpp"

namespace gadget::label {

inline void to_json(json& j, const MlpArchitecture& a) {
  j = json{{"inputs", a.inputs}, {"hidden", a.hidden}, {"outputs", a.outputs}};
}

inline void from_json(const json& j, MlpArchitecture& a) {
  j.at("inputs").get_to(a.inputs);
  j.at("hidden").get_to(a.hidden);
  j.at("outputs").get_to(a.outputs);
  a.validate();
}

/**
 * Layout: {architecture, classes, feature_names, standardizer{mean,scale},
 * layers[{weights (rows = outputs), bias}], iterations}.
 */
inline json model_to_json(const MlpModel& m) {
  json layers = json::array();
  for (const auto& lv : layer_views(m.arch, m.theta)) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < lv.w.rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(lv.w.cols()));
      for (Eigen::Index c = 0; c < lv.w.cols(); ++c) row[static_cast<std::size_t>(c)] = lv.w(r, c);
      rows.push_back(row);
    }
    layers.push_back({{"weights", rows}, {"bias", std::vector<double>(lv.b.data(), lv.b.data() + lv.b.size())}});
  }
  return json{{"architecture", m.arch},
              {"classes", m.classes},
              {"feature_names", m.feature_names},
              {"standardizer", {{"mean", m.standardizer.mean}, {"scale", m.standardizer.scale}}},
              {"layers", layers},
              {"iterations", m.iterations}};
}

inline MlpModel model_from_json(const json& j) {
  try {
    MlpModel m;
    m.arch = j.at("architecture").get<MlpArchitecture>();
    m.classes = j.at("classes").get<std::vector<std::string>>();
    m.feature_names = j.value("feature_names", std::vector<std::string>{});
    m.standardizer.mean = j.at("standardizer").at("mean").get<std::vector<double>>();
    m.standardizer.scale = j.at("standardizer").at("scale").get<std::vector<double>>();
    m.iterations = j.value("iterations", 0);
    if (m.classes.size() != static_cast<std::size_t>(m.arch.outputs)) {
      throw InvalidArgument("model: class count does not match architecture outputs");
    }
    if (m.standardizer.mean.size() != static_cast<std::size_t>(m.arch.inputs) ||
        m.standardizer.scale.size() != m.standardizer.mean.size()) {
      throw InvalidArgument("model: standardizer length does not match architecture inputs");
    }
    if (!m.feature_names.empty() && m.feature_names.size() != static_cast<std::size_t>(m.arch.inputs)) {
      throw InvalidArgument("model: feature name count does not match architecture inputs");
    }
    const auto sizes = m.arch.sizes();
    const auto& layers = j.at("layers");
    if (layers.size() + 1 != sizes.size()) throw InvalidArgument("model: layer count mismatch");
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const auto w = layers[l].at("weights").get<std::vector<std::vector<double>>>();
      const auto b = layers[l].at("bias").get<std::vector<double>>();
      if (w.size() != static_cast<std::size_t>(sizes[l + 1]) || b.size() != w.size()) {
        throw InvalidArgument("model: layer " + std::to_string(l) + " has the wrong number of units");
      }
      for (const auto& row : w) {
        if (row.size() != static_cast<std::size_t>(sizes[l])) {
          throw InvalidArgument("model: layer " + std::to_string(l) + " has the wrong fan-in");
        }
        m.theta.insert(m.theta.end(), row.begin(), row.end());
      }
      m.theta.insert(m.theta.end(), b.begin(), b.end());
    }
    return m;
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("model: malformed JSON: ") + e.what());
  }
}

inline void save_model(const MlpModel& m, const std::filesystem::path& path) {
  store::write_json_file(path, model_to_json(m));
}

inline MlpModel load_model(const std::filesystem::path& path) {
  return model_from_json(store::read_json_file(path));
}

}  // namespace gadget::label

#endif  // GADGET_LABEL_MODEL_IO_HPP
