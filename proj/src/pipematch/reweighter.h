// Copyright 2026 Pipematch Contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PIPEMATCH_REWEIGHTER_H
#define PIPEMATCH_REWEIGHTER_H

#include "pipematch/prematcher.h"
#include "pipematch/weight_overlay.h"

namespace pipematch {

/// Edges used by a virtual pre-matching, in canonical processing order (ascending edge id).
/// Boundary matches contribute their boundary edge.
std::vector<uint32_t> matched_edges(const PrematchResult &virtual_matches);

/// For each matched edge in canonical order and each of its correlated links, writes p_c =
/// conditional_p to the linked edge. Later writes to the same edge replace earlier ones.
WeightOverlay reweight(const DetectionGraph &graph, const PrematchResult &virtual_matches);

/// Same writes issued from several threads into shared last-write-wins cells. When two matched
/// edges write the same target the surviving value is whichever write landed last.
WeightOverlay reweight_parallel(const DetectionGraph &graph, const PrematchResult &virtual_matches, int workers);

/// Second pre-matching pass over the reweighted graph.
PrematchResult run_stage2_prematch(const DetectionGraph &graph, const WeightOverlay &overlay,
                                   const DetectionEventSet &events, PmcMode mode = PmcMode::Relaxed);

}  // namespace pipematch

#endif
