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

#include "pipematch/reweighter.h"

#include <algorithm>
#include <atomic>
#include <thread>

namespace pipematch {

std::vector<uint32_t> matched_edges(const PrematchResult &virtual_matches) {
    std::vector<uint32_t> edges;
    edges.reserve(virtual_matches.pairs.size() + virtual_matches.boundary.size());
    for (const auto &p : virtual_matches.pairs) {
        edges.push_back(p.edge);
    }
    for (const auto &b : virtual_matches.boundary) {
        edges.push_back(b.edge);
    }
    std::sort(edges.begin(), edges.end());
    return edges;
}

WeightOverlay reweight(const DetectionGraph &graph, const PrematchResult &virtual_matches) {
    std::vector<std::pair<uint32_t, double>> writes;
    for (uint32_t e : matched_edges(virtual_matches)) {
        for (const auto &link : graph.links_of(e)) {
            writes.emplace_back(link.correlated, link.conditional_p);
        }
    }
    return WeightOverlay(graph, std::move(writes));
}

WeightOverlay reweight_parallel(const DetectionGraph &graph, const PrematchResult &virtual_matches, int workers) {
    auto edges = matched_edges(virtual_matches);
    std::vector<uint32_t> targets;
    for (uint32_t e : edges) {
        for (const auto &link : graph.links_of(e)) {
            targets.push_back(link.correlated);
        }
    }
    std::sort(targets.begin(), targets.end());
    targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
    std::vector<double> cells(targets.size(), -1.0);

    auto work = [&](size_t first, size_t step) {
        for (size_t k = first; k < edges.size(); k += step) {
            for (const auto &link : graph.links_of(edges[k])) {
                size_t slot = std::lower_bound(targets.begin(), targets.end(), link.correlated) - targets.begin();
                std::atomic_ref<double>(cells[slot]).store(link.conditional_p, std::memory_order_relaxed);
            }
        }
    };
    size_t n = std::min<size_t>((size_t)std::max(1, workers), edges.size());
    if (n <= 1) {
        work(0, 1);
    } else {
        std::vector<std::thread> threads;
        for (size_t c = 0; c < n; c++) {
            threads.emplace_back(work, c, n);
        }
        for (auto &t : threads) {
            t.join();
        }
    }

    std::vector<std::pair<uint32_t, double>> writes;
    for (size_t k = 0; k < targets.size(); k++) {
        writes.emplace_back(targets[k], cells[k]);
    }
    return WeightOverlay(graph, std::move(writes));
}

PrematchResult run_stage2_prematch(const DetectionGraph &graph, const WeightOverlay &overlay,
                                   const DetectionEventSet &events, PmcMode mode) {
    EdgeWeights weights(graph, &overlay);
    return prematch(events, weights, mode);
}

}  // namespace pipematch
