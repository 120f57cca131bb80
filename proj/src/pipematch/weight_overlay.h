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

#ifndef PIPEMATCH_WEIGHT_OVERLAY_H
#define PIPEMATCH_WEIGHT_OVERLAY_H

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pipematch/graph_builder.h"

namespace pipematch {

/// Upper clamp for reweighted probabilities is 1 - P_F_EPSILON.
constexpr double P_F_EPSILON = 1e-12;

struct OverlayEntry {
    uint32_t edge = 0;
    double p_c = 0;
    double p_f = 0;
    double weight = 0;
};

/// Per-shot reweighting of a shared detection graph. Edges without an entry keep p_f = p_e.
class WeightOverlay {
   public:
    WeightOverlay() = default;
    /// `writes` holds the final p_c per edge. p_f = min(p_e + p_c, 1 - P_F_EPSILON).
    WeightOverlay(const DetectionGraph &graph, std::vector<std::pair<uint32_t, double>> writes);

    bool empty() const {
        return entries_.empty();
    }
    /// Sorted by edge id.
    const std::vector<OverlayEntry> &entries() const {
        return entries_;
    }
    const OverlayEntry *find(uint32_t edge) const;
    /// Adjacency of `v` re-sorted under overlay weights, or nullptr if no incident edge was written.
    const std::vector<uint32_t> *adjacency_override(uint32_t v) const;
    size_t clamped() const {
        return clamped_;
    }

    /// One line per written edge: id p_c p_f weight.
    std::string dump() const;

   private:
    std::vector<OverlayEntry> entries_;
    std::vector<std::pair<uint32_t, std::vector<uint32_t>>> resorted_;
    size_t clamped_ = 0;
};

/// Read-only weight lookup over a graph with an optional overlay.
class EdgeWeights {
   public:
    explicit EdgeWeights(const DetectionGraph &graph, const WeightOverlay *overlay = nullptr)
        : graph_(&graph), overlay_(overlay) {
    }

    const DetectionGraph &graph() const {
        return *graph_;
    }
    double weight(uint32_t edge) const {
        if (overlay_) {
            if (const auto *e = overlay_->find(edge)) {
                return e->weight;
            }
        }
        return graph_->edges[edge].weight;
    }
    /// Incident edges sorted by (effective weight, edge id).
    std::span<const uint32_t> adjacency(uint32_t v) const {
        if (overlay_) {
            if (const auto *adj = overlay_->adjacency_override(v)) {
                return *adj;
            }
        }
        return graph_->adjacency[v];
    }

   private:
    const DetectionGraph *graph_;
    const WeightOverlay *overlay_;
};

}  // namespace pipematch

#endif
