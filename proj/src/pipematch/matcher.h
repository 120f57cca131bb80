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

#ifndef PIPEMATCH_MATCHER_H
#define PIPEMATCH_MATCHER_H

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "pipematch/pauli_sim.h"
#include "pipematch/prematcher.h"
#include "pipematch/weight_overlay.h"

namespace pipematch {

/// Matching runs on fixed-point weights so that sums are exact: one unit is 2^-20.
constexpr double WEIGHT_SCALE = 1048576.0;
int64_t quantize_weight(double w);
double dequantize_weight(int64_t q);

struct ShortestPath {
    int64_t weight = 0;
    bool logical_x = false;
    /// Edge ids from the source outward.
    std::vector<uint32_t> edges;
};

/// Shortest path from u to v (or to the boundary when v == BOUNDARY) under the effective weights.
/// Ties between equal-weight paths go to fewer edges, then to the lower vertex id.
/// Throws std::runtime_error if v is unreachable.
ShortestPath pairwise_distance(const EdgeWeights &weights, uint32_t u, uint32_t v);

/// Distances among a set of events and from each event to the boundary.
class MatchingMetric {
   public:
    static constexpr int64_t UNREACHABLE = INT64_MAX;

    MatchingMetric(const EdgeWeights &weights, std::span<const uint32_t> events);

    size_t size() const {
        return events_.size();
    }
    const std::vector<uint32_t> &events() const {
        return events_;
    }
    int64_t distance(size_t a, size_t b) const {
        return dist_[a * size() + b];
    }
    bool parity(size_t a, size_t b) const {
        return parity_[a * size() + b];
    }
    int64_t boundary_distance(size_t a) const {
        return boundary_dist_[a];
    }
    bool boundary_parity(size_t a) const {
        return boundary_parity_[a];
    }

   private:
    std::vector<uint32_t> events_;
    std::vector<int64_t> dist_;
    std::vector<char> parity_;
    std::vector<int64_t> boundary_dist_;
    std::vector<char> boundary_parity_;
};

struct MatchOutcome {
    /// Free events paired with each other, (a < b), sorted.
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    /// Free events matched to the boundary, sorted.
    std::vector<uint32_t> boundary;
    /// Pairs fixed before matching.
    std::vector<MatchedPair> frozen;
    int64_t total_weight = 0;
    bool logical_x_correction = false;

    double weight() const {
        return dequantize_weight(total_weight);
    }
};

/// Exact minimum-weight perfect matching of `events` with a boundary option for each event.
/// Frozen pairs are removed before matching and added back unchanged.
/// Throws std::runtime_error when the free events admit no perfect matching.
MatchOutcome mwpm(const DetectionEventSet &events, std::span<const MatchedPair> frozen, const EdgeWeights &weights);

/// Minimum-weight matching over the metric by exhaustive search. Throws std::invalid_argument for
/// more than 12 events.
MatchOutcome brute_force_mwpm(const MatchingMetric &metric);

/// True when the correction disagrees with the actual observable flip.
/// Throws std::runtime_error unless the outcome covers exactly the shot's events.
bool judge_failure(const MatchOutcome &outcome, const ShotResult &truth);

}  // namespace pipematch

#endif
