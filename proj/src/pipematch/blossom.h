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

#ifndef PIPEMATCH_BLOSSOM_H
#define PIPEMATCH_BLOSSOM_H

#include <cstdint>
#include <span>
#include <vector>

namespace pipematch {

struct WeightedPair {
    uint32_t u;
    uint32_t v;
    int64_t weight;
};

/// Maximum-weight matching on a general graph with integer weights (Edmonds' blossom algorithm with
/// dual variables, O(n^3)). With max_cardinality set, returns a maximum-weight matching among those of
/// maximum cardinality. Returns mate[v], or -1 for unmatched vertices.
std::vector<int32_t> max_weight_matching(size_t num_vertices, std::span<const WeightedPair> edges,
                                         bool max_cardinality);

}  // namespace pipematch

#endif
