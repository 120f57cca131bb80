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

#ifndef PIPEMATCH_PREMATCHER_H
#define PIPEMATCH_PREMATCHER_H

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pipematch/pauli_sim.h"
#include "pipematch/weight_overlay.h"

namespace pipematch {

/// Zero-, half- and fully-prematched.
enum class PrematchState : uint8_t { ZP, HP, FP };

std::string_view state_name(PrematchState s);

/// State of one detection event. `partner` is the referenced vertex for HP, and the mutual partner
/// (or BOUNDARY) for FP.
struct VertexState {
    PrematchState state = PrematchState::ZP;
    uint32_t partner = NONE;

    bool operator==(const VertexState &) const = default;
};

/// Pre-match condition. Strict only accepts a unique lowest-weight candidate.
enum class PmcMode : uint8_t { Strict, Relaxed };

/// Position of the chosen neighbor B relative to the processed vertex A.
enum class Direction : uint8_t {
    NeighborBefore,  // coord(B) < coord(A)
    NeighborAfter,   // coord(A) < coord(B)
};

/// Raised when a state combination marked as an error is reached.
class PrematchError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

struct TransitionOutcome {
    bool error = false;
    VertexState a;
    VertexState b;
    std::string reason;
};

/// State transformation rules for processing A whose pre-match condition points at B.
///
///   coord(B) < coord(A)        B=ZP            B=HP   B=FP
///     A=ZP                     ZP              E      ZP
///     A=HP                     FP / ZP         E      E / ZP
///     A=FP                     E               E      E
///
///   coord(A) < coord(B)        A=ZP            A=HP           A=FP
///     B=ZP                     HP              ZP (on A)      E
///     B=HP                     E / ZP          E / ZP (A,B)   E
///     B=FP                     E               E              E
///
/// "X / Y" cells read X when the HP reference points at the other vertex and Y otherwise.
/// A completed pair marks both vertices FP with mutual partners.
TransitionOutcome transition(uint32_t a_id, VertexState a, uint32_t b_id, VertexState b, Direction dir);

struct PmcChoice {
    uint32_t target = NONE;  // vertex id or BOUNDARY
    uint32_t edge = NONE;
};

struct MatchedPair {
    uint32_t a = 0;  // earlier vertex
    uint32_t b = 0;
    uint32_t edge = NONE;

    bool operator==(const MatchedPair &) const = default;
};

struct BoundaryMatch {
    uint32_t v = 0;
    uint32_t edge = NONE;

    bool operator==(const BoundaryMatch &) const = default;
};

struct PrematchResult {
    std::vector<MatchedPair> pairs;          // sorted by a
    std::vector<BoundaryMatch> boundary;     // sorted by v
    std::vector<uint32_t> unmatched;         // sorted

    bool operator==(const PrematchResult &) const = default;
};

struct PrematchCounters {
    uint64_t vertices_processed = 0;
    uint64_t edges_scanned = 0;
    uint64_t transitions = 0;

    uint64_t total() const {
        return vertices_processed + edges_scanned + transitions;
    }
    PrematchCounters &operator+=(const PrematchCounters &o) {
        vertices_processed += o.vertices_processed;
        edges_scanned += o.edges_scanned;
        transitions += o.transitions;
        return *this;
    }
};

struct TraceEntry {
    uint32_t vertex = 0;
    VertexState before;
    VertexState after;

    bool operator==(const TraceEntry &) const = default;
};

/// Renders "(t,i,j) OLD->NEW partner", one line per entry.
std::string format_trace(const DetectionGraph &graph, const std::vector<TraceEntry> &trace);

/// Greedy local pairing of one shot's detection events, processed in coordinate order.
///
/// Boundary matching is only considered for a vertex in ZP, and only while none of its fired
/// neighbors is FP with the boundary or is a later vertex in HP.
class Prematcher {
   public:
    Prematcher(const EdgeWeights &weights, PmcMode mode) : weights_(weights), mode_(mode) {
    }

    /// Loads a shot with every event in ZP.
    void reset(const DetectionEventSet &events);
    /// Lowest-weight admissible option for fired vertex v, ties broken by edge id.
    std::optional<PmcChoice> pmc_choose(uint32_t v);
    bool boundary_allowed(uint32_t v);
    /// Processes fired vertex v. Throws PrematchError on an inconsistent state.
    void process(uint32_t v);

    /// Where a single `process_into` call reports its work. Either pointer may be null.
    struct ProcessSink {
        PrematchCounters *counters = nullptr;
        std::vector<TraceEntry> *trace = nullptr;
    };
    /// Same as `process`, reporting into `sink` instead of the members. Calls on vertices whose
    /// closed fired neighborhoods are disjoint may run concurrently.
    void process_into(uint32_t v, ProcessSink sink);

    PrematchResult result() const;

    const VertexState &state(uint32_t v) const;
    bool fired(uint32_t v) const {
        return index_of(v) != NONE;
    }
    const DetectionEventSet &events() const {
        return events_;
    }

    PrematchCounters counters;
    std::vector<TraceEntry> *trace = nullptr;

   private:
    uint32_t index_of(uint32_t v) const;
    void set_state(uint32_t v, VertexState s, std::vector<TraceEntry> *out);
    bool boundary_allowed(uint32_t v, PrematchCounters *c) const;
    std::optional<PmcChoice> pmc_choose(uint32_t v, PrematchCounters *c) const;

    const EdgeWeights &weights_;
    PmcMode mode_;
    DetectionEventSet events_;
    std::vector<VertexState> states_;
    std::vector<uint32_t> fp_edge_;
};

/// Single-threaded reference pass.
PrematchResult prematch(const DetectionEventSet &events, const EdgeWeights &weights, PmcMode mode,
                        std::vector<TraceEntry> *trace = nullptr, PrematchCounters *counters = nullptr);

/// Parallel pass. Events whose closed neighborhoods intersect are processed in coordinate order;
/// independent events run concurrently. Produces the same result as `prematch`.
PrematchResult prematch_parallel(const DetectionEventSet &events, const EdgeWeights &weights, PmcMode mode,
                                 int workers, std::vector<TraceEntry> *trace = nullptr);

}  // namespace pipematch

#endif
