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

// Umbrella header: pulls in every component.

#ifndef GADGET_GADGET_HPP
#define GADGET_GADGET_HPP

#include "gadget/annotate/boxes.hpp"
#include "gadget/annotate/review.hpp"
#include "gadget/annotate/sampling.hpp"
#include "gadget/annotate/session.hpp"
#include "gadget/augment/augment.hpp"
#include "gadget/augment/policy.hpp"
#include "gadget/augment/policy_search.hpp"
#include "gadget/augment/rgan.hpp"
#include "gadget/core/error.hpp"
#include "gadget/core/json.hpp"
#include "gadget/core/log.hpp"
#include "gadget/core/parallel.hpp"
#include "gadget/core/resample.hpp"
#include "gadget/core/rng.hpp"
#include "gadget/core/types.hpp"
#include "gadget/eval/ablation.hpp"
#include "gadget/eval/crowd_sim.hpp"
#include "gadget/eval/end_model.hpp"
#include "gadget/eval/error_tags.hpp"
#include "gadget/eval/metrics.hpp"
#include "gadget/eval/pipeline.hpp"
#include "gadget/eval/synth.hpp"
#include "gadget/eval/tipping.hpp"
#include "gadget/label/folds.hpp"
#include "gadget/label/lbfgs.hpp"
#include "gadget/label/mlp.hpp"
#include "gadget/label/model_io.hpp"
#include "gadget/label/train.hpp"
#include "gadget/match/featurize.hpp"
#include "gadget/match/ncc.hpp"
#include "gadget/match/pyramid.hpp"
#include "gadget/store/csv.hpp"
#include "gadget/store/fs.hpp"
#include "gadget/store/manifest.hpp"
#include "gadget/store/pattern_store.hpp"
#include "gadget/store/png_io.hpp"
// httplib pulls in <resolv.h>, whose _res macro breaks Eigen; keep it last.
#include "gadget/annotate/http_service.hpp"

#endif  // GADGET_GADGET_HPP
