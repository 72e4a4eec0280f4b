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

// Synthetic dataset -> simulated crowd -> patterns -> labeler -> weak labels.

#include <cstdio>

#include "gadget/eval/pipeline.hpp"

using namespace gadget;

int main() {
  set_log_sink({});
  eval::SynthSpec spec;
  spec.count = 400;
  spec.defect_rate = 0.2;
  spec.width = 32;
  spec.height = 32;
  spec.seed = 3;
  const auto ds = eval::synth_dataset(spec);

  eval::PipelineConfig cfg;
  cfg.session.defect_threshold = 40;
  cfg.augment.mode = augment::AugmentMode::None;
  cfg.seed = 3;
  const auto crowd = eval::annotate_stage(ds, cfg);
  std::printf("crowd: %zu tasks, %zu development images, %zu patterns\n", crowd.tasks, crowd.dev.entries().size(),
              crowd.patterns.size());

  const auto out = eval::learn(ds, crowd, cfg);
  std::printf("labeler %s (cv F1 %.3f)\n", out.tune.best.name().c_str(), out.tune.cv_f1);
  std::printf("weak labels for %zu images, F1 %.4f\n", out.weak.size(), out.weak_f1);
  for (std::size_t i = 0; i < 5 && i < out.weak.size(); ++i) {
    const auto& w = out.weak[i];
    std::printf("  %s -> %s (p=%.3f)\n", w.image_id.c_str(), w.predicted_class.c_str(),
                w.probabilities[w.predicted_index]);
  }
  return 0;
}
