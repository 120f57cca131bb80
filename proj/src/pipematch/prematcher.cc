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

#include "pipematch/prematcher.h"

#include <algorithm>
#include <exception>
#include <sstream>
#include <thread>

namespace pipematch {

std::string_view state_name(PrematchState s) {
    switch (s) {
        case PrematchState::ZP:
            return "ZP";
        case PrematchState::HP:
            return "HP";
        case PrematchState::FP:
            return "FP";
    }
    return "?";
}

TransitionOutcome transition(uint32_t a_id, VertexState a, uint32_t b_id, VertexState b, Direction dir) {
    TransitionOutcome out;
    out.a = a;
    out.b = b;
    auto fail = [&](const char *reason) {
        out.error = true;
        out.reason = reason;
        out.a = a;
        out.b = b;
        return out;
    };
    if (a.state == PrematchState::FP) {
        return fail("the vertex being processed is already FP");
    }
    const VertexState ZP{};
    if (dir == Direction::NeighborBefore) {
        if (b.state == PrematchState::HP) {
            return fail("an already processed vertex is still HP");
        }
        if (a.state == PrematchState::HP) {
            if (b.state == PrematchState::ZP) {
                if (a.partner == b_id) {
                    out.a = VertexState{PrematchState::FP, b_id};
                    out.b = VertexState{PrematchState::FP, a_id};
                } else {
                    out.a = ZP;
                }
            } else {
                if (a.partner == b_id) {
                    return fail("the HP reference points at a vertex that is already FP");
                }
                out.a = ZP;
            }
        }
        return out;
    }
    if (b.state == PrematchState::FP) {
        return fail("a later vertex is FP before being processed");
    }
    if (b.state == PrematchState::ZP) {
        if (a.state == PrematchState::ZP) {
            out.b = VertexState{PrematchState::HP, a_id};
        } else {
            out.a = ZP;
        }
        return out;
    }
    if (b.partner == a_id) {
        return fail("a later vertex holds an HP reference to the vertex being processed");
    }
    out.b = ZP;
    if (a.state == PrematchState::HP) {
        out.a = ZP;
    }
    return out;
}

namespace {

std::string vertex_text(const DetectionGraph &g, uint32_t v) {
    if (v == BOUNDARY) {
        return "B";
    }
    if (v == NONE) {
        return "-";
    }
    return g.vertices.at(v).str();
}

}  // namespace

std::string format_trace(const DetectionGraph &graph, const std::vector<TraceEntry> &trace) {
    std::ostringstream out;
    for (const auto &e : trace) {
        out << vertex_text(graph, e.vertex) << ' ' << state_name(e.before.state) << "->" << state_name(e.after.state)
            << ' ' << vertex_text(graph, e.after.partner) << '\n';
    }
    return out.str();
}

void Prematcher::reset(const DetectionEventSet &events) {
    events_ = events;
    states_.assign(events_.size(), VertexState{});
    fp_edge_.assign(events_.size(), NONE);
}

uint32_t Prematcher::index_of(uint32_t v) const {
    auto it = std::lower_bound(events_.begin(), events_.end(), v);
    if (it == events_.end() || *it != v) {
        return NONE;
    }
    return (uint32_t)(it - events_.begin());
}

const VertexState &Prematcher::state(uint32_t v) const {
    uint32_t k = index_of(v);
    if (k == NONE) {
        throw std::invalid_argument("vertex " + std::to_string(v) + " is not a detection event of this shot");
    }
    return states_[k];
}

void Prematcher::set_state(uint32_t v, VertexState s, std::vector<TraceEntry> *out) {
    uint32_t k = index_of(v);
    if (out) {
        out->push_back(TraceEntry{v, states_[k], s});
    }
    states_[k] = s;
}

bool Prematcher::boundary_allowed(uint32_t v) {
    return boundary_allowed(v, &counters);
}

std::optional<PmcChoice> Prematcher::pmc_choose(uint32_t v) {
    return pmc_choose(v, &counters);
}

void Prematcher::process(uint32_t v) {
    process_into(v, ProcessSink{&counters, trace});
}

bool Prematcher::boundary_allowed(uint32_t v, PrematchCounters *c) const {
    if (state(v).state != PrematchState::ZP) {
        return false;
    }
    const auto &g = weights_.graph();
    for (uint32_t eid : weights_.adjacency(v)) {
        if (c) {
            c->edges_scanned++;
        }
        uint32_t other = g.edges[eid].other(v);
        if (other == BOUNDARY) {
            continue;
        }
        uint32_t k = index_of(other);
        if (k == NONE) {
            continue;
        }
        const VertexState &s = states_[k];
        if (s.state == PrematchState::FP && s.partner == BOUNDARY) {
            return false;
        }
        if (other > v && s.state == PrematchState::HP) {
            return false;
        }
    }
    return true;
}

std::optional<PmcChoice> Prematcher::pmc_choose(uint32_t v, PrematchCounters *c) const {
    const auto &g = weights_.graph();
    // The neighborhood check only matters once the walk reaches a boundary edge.
    std::optional<bool> allow_boundary;
    std::optional<PmcChoice> best;
    double best_weight = 0;
    for (uint32_t eid : weights_.adjacency(v)) {
        if (c) {
            c->edges_scanned++;
        }
        uint32_t other = g.edges[eid].other(v);
        bool candidate;
        if (other == BOUNDARY) {
            if (!allow_boundary) {
                allow_boundary = boundary_allowed(v, c);
            }
            candidate = *allow_boundary;
        } else {
            candidate = fired(other);
        }
        if (!candidate) {
            continue;
        }
        double w = weights_.weight(eid);
        if (!best) {
            best = PmcChoice{other, eid};
            best_weight = w;
            if (mode_ == PmcMode::Relaxed) {
                return best;
            }
            continue;
        }
        // Strict: the runner-up decides whether the lowest weight is unique.
        if (w == best_weight) {
            return std::nullopt;
        }
        return best;
    }
    return best;
}

void Prematcher::process_into(uint32_t v, ProcessSink sink) {
    if (sink.counters) {
        sink.counters->vertices_processed++;
    }
    uint32_t k = index_of(v);
    if (k == NONE) {
        throw std::invalid_argument("vertex " + std::to_string(v) + " is not a detection event of this shot");
    }
    const auto &g = weights_.graph();
    VertexState cur = states_[k];
    if (cur.state == PrematchState::FP) {
        throw PrematchError("pre-matching inconsistency: " + vertex_text(g, v) + " is FP before being processed");
    }
    auto choice = pmc_choose(v, sink.counters);
    if (!choice) {
        if (cur.state == PrematchState::HP) {
            set_state(v, VertexState{}, sink.trace);
        }
        return;
    }
    if (choice->target == BOUNDARY) {
        set_state(v, VertexState{PrematchState::FP, BOUNDARY}, sink.trace);
        fp_edge_[k] = choice->edge;
        return;
    }
    uint32_t b = choice->target;
    uint32_t kb = index_of(b);
    VertexState sb = states_[kb];
    if (sink.counters) {
        sink.counters->transitions++;
    }
    auto out = transition(v, cur, b, sb, b < v ? Direction::NeighborBefore : Direction::NeighborAfter);
    if (out.error) {
        throw PrematchError("pre-matching inconsistency: " + out.reason + " (A=" + vertex_text(g, v) + " " +
                            std::string(state_name(cur.state)) + ", B=" + vertex_text(g, b) + " " +
                            std::string(state_name(sb.state)) + ")");
    }
    if (out.a != cur) {
        set_state(v, out.a, sink.trace);
    }
    if (out.b != sb) {
        set_state(b, out.b, sink.trace);
    }
    if (out.a.state == PrematchState::FP) {
        fp_edge_[k] = choice->edge;
        fp_edge_[kb] = choice->edge;
    }
}

PrematchResult Prematcher::result() const {
    PrematchResult r;
    for (size_t k = 0; k < events_.size(); k++) {
        uint32_t v = events_[k];
        const auto &s = states_[k];
        if (s.state != PrematchState::FP) {
            r.unmatched.push_back(v);
        } else if (s.partner == BOUNDARY) {
            r.boundary.push_back(BoundaryMatch{v, fp_edge_[k]});
        } else if (v < s.partner) {
            r.pairs.push_back(MatchedPair{v, s.partner, fp_edge_[k]});
        }
    }
    return r;
}

namespace {

void check_purity(const Prematcher &pm) {
    for (uint32_t v : pm.events()) {
        if (pm.state(v).state == PrematchState::HP) {
            throw PrematchError("pre-matching inconsistency: vertex left in HP after the pass");
        }
    }
}

}  // namespace

PrematchResult prematch(const DetectionEventSet &events, const EdgeWeights &weights, PmcMode mode,
                        std::vector<TraceEntry> *trace, PrematchCounters *counters) {
    Prematcher pm(weights, mode);
    pm.trace = trace;
    pm.reset(events);
    for (uint32_t v : events) {
        pm.process(v);
    }
    check_purity(pm);
    if (counters) {
        *counters += pm.counters;
    }
    return pm.result();
}

PrematchResult prematch_parallel(const DetectionEventSet &events, const EdgeWeights &weights, PmcMode mode,
                                 int workers, std::vector<TraceEntry> *trace) {
    const auto &g = weights.graph();
    size_t n = events.size();
    auto index_of = [&](uint32_t v) -> uint32_t {
        auto it = std::lower_bound(events.begin(), events.end(), v);
        return it == events.end() || *it != v ? NONE : (uint32_t)(it - events.begin());
    };
    std::vector<std::vector<uint32_t>> neighbors(n);
    for (size_t k = 0; k < n; k++) {
        for (uint32_t eid : g.adjacency[events[k]]) {
            uint32_t other = g.edges[eid].other(events[k]);
            if (other == BOUNDARY) {
                continue;
            }
            uint32_t j = index_of(other);
            if (j != NONE) {
                neighbors[k].push_back(j);
            }
        }
    }
    // Two events conflict when their closed fired neighborhoods intersect. Each event waits for every
    // earlier conflicting event, so each level holds pairwise independent events.
    std::vector<uint32_t> level(n, 0);
    uint32_t max_level = 0;
    for (size_t k = 0; k < n; k++) {
        auto bump = [&](uint32_t j) {
            if (j < k) {
                level[k] = std::max(level[k], level[j] + 1);
            }
        };
        for (uint32_t j : neighbors[k]) {
            bump(j);
            for (uint32_t i : neighbors[j]) {
                bump(i);
            }
        }
        max_level = std::max(max_level, level[k]);
    }
    std::vector<std::vector<uint32_t>> by_level(n ? max_level + 1 : 0);
    for (uint32_t k = 0; k < n; k++) {
        by_level[level[k]].push_back(k);
    }

    // A single instance is driven from several threads; each level touches disjoint neighborhoods.
    Prematcher pm(weights, mode);
    pm.reset(events);
    std::vector<std::vector<TraceEntry>> per_vertex_trace(n);
    workers = std::max(1, workers);
    for (const auto &batch : by_level) {
        size_t chunks = std::min<size_t>((size_t)workers, batch.size());
        if (chunks <= 1) {
            for (uint32_t k : batch) {
                Prematcher::ProcessSink sink{nullptr, trace ? &per_vertex_trace[k] : nullptr};
                pm.process_into(events[k], sink);
            }
            continue;
        }
        std::vector<std::exception_ptr> failures(chunks);
        std::vector<std::thread> threads;
        for (size_t c = 0; c < chunks; c++) {
            threads.emplace_back([&, c]() {
                try {
                    for (size_t idx = c; idx < batch.size(); idx += chunks) {
                        uint32_t k = batch[idx];
                        Prematcher::ProcessSink sink{nullptr, trace ? &per_vertex_trace[k] : nullptr};
                        pm.process_into(events[k], sink);
                    }
                } catch (...) {
                    failures[c] = std::current_exception();
                }
            });
        }
        for (auto &t : threads) {
            t.join();
        }
        for (auto &f : failures) {
            if (f) {
                std::rethrow_exception(f);
            }
        }
    }
    check_purity(pm);
    if (trace) {
        for (auto &entries : per_vertex_trace) {
            trace->insert(trace->end(), entries.begin(), entries.end());
        }
    }
    return pm.result();
}

}  // namespace pipematch
