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

#ifndef PIPEMATCH_GRAPH_BUILDER_H
#define PIPEMATCH_GRAPH_BUILDER_H

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pipematch/code_circuits.h"
#include "pipematch/coord.h"
#include "pipematch/pauli_sim.h"

namespace pipematch {

/// A fault recorded on an edge. `decomposed` is empty when the fault produced this edge's endpoints
/// directly, and lists every basis edge of its decomposition otherwise.
struct EdgeError {
    uint32_t gate_id = 0;
    GatePauli pauli;
    double probability = 0;
    std::vector<uint32_t> decomposed;
};

struct Edge {
    uint32_t id = 0;
    uint32_t u = 0;
    /// Larger endpoint, or BOUNDARY. A boundary edge is identified by `u` alone.
    uint32_t v = BOUNDARY;
    /// Whether applying this edge's correction flips the observable.
    bool logical_x = false;
    std::vector<EdgeError> errors;
    double p_e = 0;
    double weight = 0;

    bool is_boundary() const {
        return v == BOUNDARY;
    }
    uint32_t other(uint32_t x) const {
        return x == u ? v : u;
    }
};

struct CorrelatedEdgeLink {
    uint32_t parent = 0;
    uint32_t correlated = 0;
    double conditional_p = 0;
};

/// Treatment of faults with two detection events that both already own boundary edges.
enum class BoundaryPairPolicy : uint8_t {
    /// Deferred to decomposition when the two boundary edges reproduce the fault's observable flip;
    /// otherwise the fault gets its own edge.
    DecomposeWhenConsistent,
    /// Always create an edge between the two events.
    AlwaysEdge,
};

struct GraphOptions {
    BoundaryPairPolicy boundary_pairs = BoundaryPairPolicy::AlwaysEdge;
    /// Allow pass 2 to join an X-type and a Z-type detector. When off, such faults are decomposed.
    bool mixed_basis_edges = false;
};

struct GraphStats {
    size_t faults = 0;
    size_t silent_faults = 0;
    size_t boundary_edges = 0;
    size_t bulk_edges = 0;
    size_t decomposed_faults = 0;
    /// Decomposed faults that had more than one minimum-size decomposition.
    size_t ambiguous_decompositions = 0;
    size_t max_events_per_fault = 0;
};

/// Space-time graph of detectors. Vertex ids are detector ids and follow Coord3 order.
/// Edge ids follow the canonical order: ascending (u, v), boundary last.
class DetectionGraph {
   public:
    std::vector<Coord3> vertices;
    std::vector<Edge> edges;
    /// Incident edge ids per vertex, sorted by (weight, edge id).
    std::vector<std::vector<uint32_t>> adjacency;
    /// Sorted by (parent, correlated).
    std::vector<CorrelatedEdgeLink> links;
    GraphStats stats;

    size_t num_vertices() const {
        return vertices.size();
    }
    /// Edge between a and b (b may be BOUNDARY), or NONE.
    uint32_t find_edge(uint32_t a, uint32_t b) const;
    uint32_t boundary_edge(uint32_t v) const {
        return find_edge(v, BOUNDARY);
    }
    std::span<const CorrelatedEdgeLink> links_of(uint32_t parent) const;
    void set_links(std::vector<CorrelatedEdgeLink> new_links);

    /// Re-sorts every adjacency list by (weight, edge id).
    void sort_adjacency();
    /// Rebuilds lookup tables after `edges` was replaced. Edge ids must equal positions.
    void index_edges();

    /// One edge per line: id, endpoints, p_e, weight, observable bit, then correlated links.
    std::string dump() const;

    struct WeightedEdge {
        uint32_t u;
        uint32_t v;
        double weight;
        bool logical_x = false;
    };
    /// Hand-built graph for tests and tools. Vertices must be strictly increasing in Coord3 order.
    static DetectionGraph from_weighted_edges(std::vector<Coord3> vertices, std::span<const WeightedEdge> edges);

   private:
    std::unordered_map<uint64_t, uint32_t> edge_index_;
    std::vector<uint32_t> link_offsets_;
};

/// Three-pass classification: single-event faults create boundary edges, two-event faults create
/// bulk edges, and the remaining faults are decomposed over that basis and appended to every
/// component edge. Probabilities are left at zero.
/// Throws std::runtime_error when a fault cannot be decomposed or an edge sees conflicting observable flips.
DetectionGraph enumerate_and_classify(const ErrorModel &model, const GraphOptions &options = {});

/// Minimum-cardinality set of basis edges whose endpoint symmetric difference (boundary excluded)
/// equals `events` and whose observable flips xor to `logical_x`. Only edges joining two events, or an
/// event and the boundary, are used. Ties go to the lexicographically smallest edge id list. Throws std::runtime_error when no decomposition exists.
std::vector<uint32_t> decompose(std::span<const uint32_t> events, bool logical_x, const DetectionGraph &basis,
                                size_t *num_minimal = nullptr);

/// Probability that exactly one of several independent events occurs.
double compute_edge_probability(std::span<const double> per_gate_probabilities);

/// Sums of error probabilities grouped by generating gate, in gate order.
std::vector<double> group_by_gate(std::span<const EdgeError> errors);

/// Fills p_e and weight of every edge and sorts adjacency.
void assign_probabilities(DetectionGraph &graph);

/// For each parent edge and each distinct correlated edge named in its errors' decompositions:
/// conditional_p = P(exactly one of the carrying faults, grouped by gate) / p_e(parent).
/// Throws std::runtime_error if a conditional probability exceeds 1.
std::vector<CorrelatedEdgeLink> compute_correlation_links(const DetectionGraph &graph);

/// w = -ln p. Throws std::invalid_argument unless 0 < p < 1.
double weight_of(double p);

/// Classification, probabilities and correlation links in one call.
DetectionGraph build_detection_graph(const ErrorModel &model, const GraphOptions &options = {});

}  // namespace pipematch

#endif
