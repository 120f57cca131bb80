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

#ifndef PIPEMATCH_COORD_H
#define PIPEMATCH_COORD_H

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace pipematch {

/// Space-time coordinate of a detector: round layer `t`, lattice row `i`, lattice column `j`.
/// Ordered lexicographically by (t, i, j), which is also the processing order of pre-matching.
struct Coord3 {
    int32_t t = 0;
    int32_t i = 0;
    int32_t j = 0;

    auto operator<=>(const Coord3 &) const = default;
    bool operator==(const Coord3 &) const = default;

    std::string str() const {
        return "(" + std::to_string(t) + "," + std::to_string(i) + "," + std::to_string(j) + ")";
    }
};

/// Vertex index used for the boundary side of a boundary edge, and for "matched to boundary".
constexpr uint32_t BOUNDARY = std::numeric_limits<uint32_t>::max();
/// Marker for an absent vertex / edge / qubit reference.
constexpr uint32_t NONE = std::numeric_limits<uint32_t>::max() - 1;

}  // namespace pipematch

#endif
