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

#include "pipematch/weight_overlay.h"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace pipematch {

WeightOverlay::WeightOverlay(const DetectionGraph &graph, std::vector<std::pair<uint32_t, double>> writes) {
    // Later writes to the same edge win.
    std::stable_sort(writes.begin(), writes.end(), [](const auto &a, const auto &b) {
        return a.first < b.first;
    });
    for (size_t k = 0; k < writes.size(); k++) {
        if (k + 1 < writes.size() && writes[k + 1].first == writes[k].first) {
            continue;
        }
        auto [edge, p_c] = writes[k];
        if (edge >= graph.edges.size()) {
            throw std::invalid_argument("overlay write to unknown edge " + std::to_string(edge));
        }
        if (!(p_c >= 0 && p_c <= 1)) {
            throw std::invalid_argument("overlay p_c out of range for edge " + std::to_string(edge));
        }
        OverlayEntry e;
        e.edge = edge;
        e.p_c = p_c;
        e.p_f = graph.edges[edge].p_e + p_c;
        if (e.p_f > 1 - P_F_EPSILON) {
            e.p_f = 1 - P_F_EPSILON;
            clamped_++;
        }
        e.weight = weight_of(e.p_f);
        entries_.push_back(e);
    }

    std::vector<uint32_t> touched;
    for (const auto &e : entries_) {
        const Edge &edge = graph.edges[e.edge];
        touched.push_back(edge.u);
        if (!edge.is_boundary()) {
            touched.push_back(edge.v);
        }
    }
    std::sort(touched.begin(), touched.end());
    touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
    auto w = [&](uint32_t eid) {
        const auto *e = find(eid);
        return e ? e->weight : graph.edges[eid].weight;
    };
    for (uint32_t v : touched) {
        std::vector<uint32_t> adj = graph.adjacency[v];
        std::sort(adj.begin(), adj.end(), [&](uint32_t a, uint32_t b) {
            double wa = w(a), wb = w(b);
            return wa != wb ? wa < wb : a < b;
        });
        resorted_.emplace_back(v, std::move(adj));
    }
}

const OverlayEntry *WeightOverlay::find(uint32_t edge) const {
    auto it = std::lower_bound(entries_.begin(), entries_.end(), edge, [](const OverlayEntry &e, uint32_t x) {
        return e.edge < x;
    });
    return it != entries_.end() && it->edge == edge ? &*it : nullptr;
}

const std::vector<uint32_t> *WeightOverlay::adjacency_override(uint32_t v) const {
    auto it = std::lower_bound(resorted_.begin(), resorted_.end(), v, [](const auto &e, uint32_t x) {
        return e.first < x;
    });
    return it != resorted_.end() && it->first == v ? &it->second : nullptr;
}

std::string WeightOverlay::dump() const {
    std::string out;
    char buf[128];
    for (const auto &e : entries_) {
        std::snprintf(buf, sizeof(buf), "%u %.17g %.17g %.17g\n", e.edge, e.p_c, e.p_f, e.weight);
        out += buf;
    }
    return out;
}

}  // namespace pipematch
