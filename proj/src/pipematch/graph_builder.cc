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

#include "pipematch/graph_builder.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pipematch {

namespace {

uint64_t edge_key(uint32_t a, uint32_t b) {
    if (b < a) {
        std::swap(a, b);
    }
    return ((uint64_t)a << 32) | b;
}

std::string coord_text(const DetectionGraph &g, uint32_t v) {
    if (v == BOUNDARY) {
        return "B";
    }
    const auto &c = g.vertices[v];
    return std::to_string(c.t) + "," + std::to_string(c.i) + "," + std::to_string(c.j);
}

std::string describe_events(const DetectionGraph &g, std::span<const uint32_t> events) {
    std::string out;
    for (uint32_t e : events) {
        out += g.vertices.at(e).str();
    }
    return out;
}

}  // namespace

uint32_t DetectionGraph::find_edge(uint32_t a, uint32_t b) const {
    auto it = edge_index_.find(edge_key(a, b));
    return it == edge_index_.end() ? NONE : it->second;
}

std::span<const CorrelatedEdgeLink> DetectionGraph::links_of(uint32_t parent) const {
    if (parent + 1 >= link_offsets_.size()) {
        return {};
    }
    return std::span<const CorrelatedEdgeLink>(links).subspan(link_offsets_[parent],
                                                             link_offsets_[parent + 1] - link_offsets_[parent]);
}

void DetectionGraph::set_links(std::vector<CorrelatedEdgeLink> new_links) {
    for (const auto &l : new_links) {
        if (l.parent >= edges.size() || l.correlated >= edges.size() || l.parent == l.correlated) {
            throw std::invalid_argument("correlated link must join two distinct existing edges");
        }
    }
    links = std::move(new_links);
    std::sort(links.begin(), links.end(), [](const CorrelatedEdgeLink &a, const CorrelatedEdgeLink &b) {
        return std::pair{a.parent, a.correlated} < std::pair{b.parent, b.correlated};
    });
    link_offsets_.assign(edges.size() + 1, 0);
    for (const auto &l : links) {
        link_offsets_[l.parent + 1]++;
    }
    for (size_t k = 0; k < edges.size(); k++) {
        link_offsets_[k + 1] += link_offsets_[k];
    }
}

void DetectionGraph::sort_adjacency() {
    for (auto &adj : adjacency) {
        std::sort(adj.begin(), adj.end(), [&](uint32_t a, uint32_t b) {
            if (edges[a].weight != edges[b].weight) {
                return edges[a].weight < edges[b].weight;
            }
            return a < b;
        });
    }
}

void DetectionGraph::index_edges() {
    edge_index_.clear();
    adjacency.assign(vertices.size(), {});
    for (uint32_t k = 0; k < edges.size(); k++) {
        const Edge &e = edges[k];
        if (e.id != k) {
            throw std::logic_error("edge ids must equal their positions");
        }
        edge_index_[edge_key(e.u, e.v)] = k;
        adjacency[e.u].push_back(k);
        if (!e.is_boundary()) {
            adjacency[e.v].push_back(k);
        }
    }
    sort_adjacency();
    set_links(std::move(links));
}

std::string DetectionGraph::dump() const {
    std::ostringstream out;
    out << "# pipematch detection graph vertices=" << vertices.size() << " edges=" << edges.size()
        << " links=" << links.size() << "\n";
    out << "# id u v p_e weight observable links(correlated:conditional_p)...\n";
    char buf[64];
    for (const auto &e : edges) {
        out << e.id << ' ' << coord_text(*this, e.u) << ' ' << coord_text(*this, e.v);
        std::snprintf(buf, sizeof(buf), " %.9e %.9e", e.p_e, e.weight);
        out << buf << ' ' << (e.logical_x ? 1 : 0);
        for (const auto &l : links_of(e.id)) {
            std::snprintf(buf, sizeof(buf), " %u:%.9e", l.correlated, l.conditional_p);
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

DetectionGraph DetectionGraph::from_weighted_edges(std::vector<Coord3> vertices, std::span<const WeightedEdge> edges) {
    for (size_t k = 1; k < vertices.size(); k++) {
        if (!(vertices[k - 1] < vertices[k])) {
            throw std::invalid_argument("vertices must be strictly increasing in coordinate order");
        }
    }
    DetectionGraph g;
    g.vertices = std::move(vertices);
    std::vector<Edge> sorted;
    for (const auto &we : edges) {
        Edge e;
        e.u = std::min(we.u, we.v);
        e.v = std::max(we.u, we.v);
        if (e.u >= g.vertices.size() || (e.v != BOUNDARY && e.v >= g.vertices.size()) || e.u == e.v) {
            throw std::invalid_argument("edge endpoint out of range");
        }
        if (!(we.weight > 0) || !std::isfinite(we.weight)) {
            throw std::invalid_argument("edge weights must be positive and finite");
        }
        e.weight = we.weight;
        e.p_e = std::exp(-we.weight);
        e.logical_x = we.logical_x;
        sorted.push_back(e);
    }
    std::sort(sorted.begin(), sorted.end(), [](const Edge &a, const Edge &b) {
        return std::pair{a.u, a.v} < std::pair{b.u, b.v};
    });
    for (size_t k = 1; k < sorted.size(); k++) {
        if (sorted[k].u == sorted[k - 1].u && sorted[k].v == sorted[k - 1].v) {
            throw std::invalid_argument("parallel edges are not supported");
        }
    }
    for (uint32_t k = 0; k < sorted.size(); k++) {
        sorted[k].id = k;
    }
    g.edges = std::move(sorted);
    g.index_edges();
    return g;
}

double weight_of(double p) {
    if (!(p > 0 && p < 1)) {
        throw std::invalid_argument("edge probability must lie in (0, 1), got " + std::to_string(p));
    }
    return -std::log(p);
}

double compute_edge_probability(std::span<const double> ps) {
    size_t n = ps.size();
    // prefix[i] = prod_{j<i} (1 - p_j); suffix handled on the fly.
    std::vector<double> prefix(n + 1, 1.0);
    for (size_t i = 0; i < n; i++) {
        if (!(ps[i] >= 0 && ps[i] <= 1)) {
            throw std::invalid_argument("probabilities must lie in [0, 1]");
        }
        prefix[i + 1] = prefix[i] * (1 - ps[i]);
    }
    double total = 0;
    double suffix = 1;
    for (size_t i = n; i-- > 0;) {
        total += ps[i] * prefix[i] * suffix;
        suffix *= 1 - ps[i];
    }
    return total;
}

std::vector<double> group_by_gate(std::span<const EdgeError> errors) {
    std::map<uint32_t, double> sums;
    for (const auto &e : errors) {
        sums[e.gate_id] += e.probability;
    }
    std::vector<double> out;
    out.reserve(sums.size());
    for (const auto &[gate, p] : sums) {
        out.push_back(p);
    }
    return out;
}

std::vector<uint32_t> decompose(std::span<const uint32_t> events, bool logical_x, const DetectionGraph &basis,
                                size_t *num_minimal) {
    size_t n = events.size();
    if (n == 0) {
        if (num_minimal) {
            *num_minimal = 1;
        }
        return {};
    }
    if (n > 16) {
        throw std::runtime_error("cannot decompose a fault with more than 16 detection events");
    }
    // Candidate edges per event: those whose other endpoint is the boundary or another event.
    std::vector<std::vector<std::pair<uint32_t, int>>> options(n);  // (edge id, partner index or -1)
    for (size_t i = 0; i < n; i++) {
        for (uint32_t eid : basis.adjacency.at(events[i])) {
            const Edge &e = basis.edges[eid];
            uint32_t other = e.other(events[i]);
            if (other == BOUNDARY) {
                options[i].emplace_back(eid, -1);
                continue;
            }
            auto it = std::lower_bound(events.begin(), events.end(), other);
            if (it != events.end() && *it == other) {
                options[i].emplace_back(eid, (int)(it - events.begin()));
            }
        }
        std::sort(options[i].begin(), options[i].end());
    }

    std::vector<uint32_t> best;
    bool found = false;
    size_t count_best = 0;
    std::vector<uint32_t> chosen;
    auto consider = [&]() {
        std::vector<uint32_t> sorted = chosen;
        std::sort(sorted.begin(), sorted.end());
        if (!found || sorted.size() < best.size()) {
            best = sorted;
            found = true;
            count_best = 1;
        } else if (sorted.size() == best.size()) {
            if (sorted != best) {
                count_best++;
            }
            if (sorted < best) {
                best = sorted;
            }
        }
    };
    auto recurse = [&](auto &self, uint32_t mask, bool parity) -> void {
        if (found && chosen.size() > best.size()) {
            return;
        }
        if (mask == 0) {
            if (parity == logical_x) {
                consider();
            }
            return;
        }
        size_t i = (size_t)__builtin_ctz(mask);
        for (auto [eid, j] : options[i]) {
            uint32_t next = mask & ~(1u << i);
            if (j >= 0) {
                if (!(next & (1u << j))) {
                    continue;
                }
                next &= ~(1u << j);
            }
            chosen.push_back(eid);
            self(self, next, parity ^ basis.edges[eid].logical_x);
            chosen.pop_back();
        }
    };
    recurse(recurse, (uint32_t)((1ull << n) - 1), false);
    if (!found) {
        throw std::runtime_error("fault with detection events " + describe_events(basis, events) +
                                 " cannot be decomposed into basis edges");
    }
    if (num_minimal) {
        *num_minimal = count_best;
    }
    return best;
}

DetectionGraph enumerate_and_classify(const ErrorModel &model, const GraphOptions &options) {
    const Circuit &circuit = model.circuit();
    DetectionGraph g;
    g.vertices.reserve(circuit.detectors.size());
    for (const auto &d : circuit.detectors) {
        g.vertices.push_back(d.coord);
    }
    const auto &mechs = model.mechanisms();
    g.stats.faults = mechs.size();

    std::unordered_map<uint64_t, Edge> pending;
    auto add_direct = [&](uint32_t a, uint32_t b, const ErrorMechanism &m) {
        uint64_t key = edge_key(a, b);
        auto [it, inserted] = pending.try_emplace(key);
        Edge &e = it->second;
        if (inserted) {
            e.u = std::min(a, b);
            e.v = std::max(a, b);
            e.logical_x = m.logical_x_flip;
        } else if (e.logical_x != m.logical_x_flip) {
            throw std::runtime_error("faults generating edge " + coord_text(g, e.u) + " - " + coord_text(g, e.v) +
                                     " disagree on the observable flip; the circuit distance is below 3");
        }
        e.errors.push_back(EdgeError{m.gate_id, m.pauli, m.probability, {}});
    };

    // Pass 1: single detection events become boundary edges.
    for (const auto &m : mechs) {
        g.stats.max_events_per_fault = std::max(g.stats.max_events_per_fault, m.events.size());
        if (m.events.empty()) {
            g.stats.silent_faults++;
        } else if (m.events.size() == 1) {
            add_direct(m.events[0], BOUNDARY, m);
        }
    }
    auto boundary_flip = [&](uint32_t v) -> int {
        auto it = pending.find(edge_key(v, BOUNDARY));
        return it == pending.end() ? -1 : (int)it->second.logical_x;
    };
    // Pass 2: pairs of detection events.
    std::vector<const ErrorMechanism *> deferred;
    for (const auto &m : mechs) {
        if (m.events.size() != 2) {
            if (m.events.size() > 2) {
                deferred.push_back(&m);
            }
            continue;
        }
        if (!options.mixed_basis_edges &&
            circuit.detectors[m.events[0]].basis != circuit.detectors[m.events[1]].basis) {
            deferred.push_back(&m);
            continue;
        }
        int fa = boundary_flip(m.events[0]);
        int fb = boundary_flip(m.events[1]);
        bool both_boundary = fa >= 0 && fb >= 0;
        if (both_boundary && options.boundary_pairs == BoundaryPairPolicy::DecomposeWhenConsistent &&
            (bool)(fa ^ fb) == m.logical_x_flip) {
            deferred.push_back(&m);
            continue;
        }
        add_direct(m.events[0], m.events[1], m);
    }

    std::vector<Edge> edges;
    edges.reserve(pending.size());
    for (auto &[key, e] : pending) {
        edges.push_back(std::move(e));
    }
    std::sort(edges.begin(), edges.end(), [](const Edge &a, const Edge &b) {
        return std::pair{a.u, a.v} < std::pair{b.u, b.v};
    });
    for (uint32_t k = 0; k < edges.size(); k++) {
        edges[k].id = k;
        if (edges[k].is_boundary()) {
            g.stats.boundary_edges++;
        } else {
            g.stats.bulk_edges++;
        }
    }
    g.edges = std::move(edges);
    g.index_edges();

    // Pass 3: decompose the remaining faults over the basis found so far.
    for (const ErrorMechanism *m : deferred) {
        size_t num_minimal = 0;
        auto parts = decompose(m->events, m->logical_x_flip, g, &num_minimal);
        if (num_minimal > 1) {
            g.stats.ambiguous_decompositions++;
        }
        g.stats.decomposed_faults++;
        if (parts.size() == 1) {
            g.edges[parts[0]].errors.push_back(EdgeError{m->gate_id, m->pauli, m->probability, {}});
            continue;
        }
        for (uint32_t eid : parts) {
            g.edges[eid].errors.push_back(EdgeError{m->gate_id, m->pauli, m->probability, parts});
        }
    }
    return g;
}

void assign_probabilities(DetectionGraph &graph) {
    for (auto &e : graph.edges) {
        if (e.errors.empty()) {
            throw std::logic_error("edge without generating faults");
        }
        auto ps = group_by_gate(e.errors);
        e.p_e = compute_edge_probability(ps);
        e.weight = weight_of(e.p_e);
    }
    graph.sort_adjacency();
}

std::vector<CorrelatedEdgeLink> compute_correlation_links(const DetectionGraph &graph) {
    std::vector<CorrelatedEdgeLink> out;
    for (const auto &parent : graph.edges) {
        std::map<uint32_t, std::vector<EdgeError>> carriers;
        for (const auto &err : parent.errors) {
            for (uint32_t c : err.decomposed) {
                if (c != parent.id) {
                    carriers[c].push_back(err);
                }
            }
        }
        for (const auto &[c, errs] : carriers) {
            auto ps = group_by_gate(errs);
            double p_c = compute_edge_probability(ps);
            double conditional = p_c / parent.p_e;
            if (conditional > 1 + 1e-12) {
                throw std::runtime_error("conditional probability " + std::to_string(conditional) + " > 1 for edge " +
                                         std::to_string(parent.id) + " -> " + std::to_string(c));
            }
            if (!(conditional > 0)) {
                continue;
            }
            out.push_back(CorrelatedEdgeLink{parent.id, c, std::min(conditional, 1.0)});
        }
    }
    return out;
}

DetectionGraph build_detection_graph(const ErrorModel &model, const GraphOptions &options) {
    DetectionGraph g = enumerate_and_classify(model, options);
    assign_probabilities(g);
    g.set_links(compute_correlation_links(g));
    return g;
}

}  // namespace pipematch
