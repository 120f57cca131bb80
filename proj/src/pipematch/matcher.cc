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


#include "pipematch/matcher.h"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <tuple>

#include "pipematch/blossom.h"

namespace pipematch {

int64_t quantize_weight(double w) {
    if (!(w >= 0) || !std::isfinite(w)) {
        throw std::invalid_argument("edge weight must be finite and non-negative");
    }
    return std::llround(w * WEIGHT_SCALE);
}

double dequantize_weight(int64_t q) {
    return (double)q / WEIGHT_SCALE;
}

namespace {

constexpr int64_t INF = MatchingMetric::UNREACHABLE;

// Per-thread Dijkstra state, reset lazily with an epoch stamp.
struct Scratch {
    std::vector<uint32_t> stamp;
    std::vector<int64_t> dist;
    std::vector<uint32_t> hops;
    std::vector<char> parity;
    std::vector<char> settled;
    std::vector<uint32_t> pred;
    std::vector<uint32_t> target;
    uint32_t epoch = 0;

    void prepare(size_t n) {
        if (stamp.size() < n) {
            stamp.assign(n, 0);
            dist.resize(n);
            hops.resize(n);
            parity.resize(n);
            settled.resize(n);
            pred.resize(n);
            target.resize(n);
            epoch = 0;
        }
        if (++epoch == 0) {
            std::fill(stamp.begin(), stamp.end(), 0);
            epoch = 1;
        }
    }
    void touch(uint32_t v) {
        if (stamp[v] != epoch) {
            stamp[v] = epoch;
            dist[v] = INF;
            hops[v] = UINT32_MAX;
            parity[v] = 0;
            settled[v] = 0;
            pred[v] = NONE;
            target[v] = NONE;
        }
    }
};

thread_local Scratch scratch;

struct SearchResult {
    std::vector<int64_t> dist;
    std::vector<char> parity;
    int64_t boundary_dist = INF;
    uint32_t boundary_hops = UINT32_MAX;
    uint32_t boundary_vertex = NONE;
    uint32_t boundary_edge = NONE;
    bool boundary_parity = false;
};

SearchResult search(const EdgeWeights &weights, uint32_t source, std::span<const uint32_t> targets,
                    bool want_boundary) {
    const auto &g = weights.graph();
    Scratch &s = scratch;
    s.prepare(g.num_vertices());
    SearchResult out;
    out.dist.assign(targets.size(), INF);
    out.parity.assign(targets.size(), 0);
    for (size_t k = 0; k < targets.size(); k++) {
        s.touch(targets[k]);
        s.target[targets[k]] = (uint32_t)k;
    }
    size_t remaining = targets.size();

    using Item = std::tuple<int64_t, uint32_t, uint32_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    s.touch(source);
    s.dist[source] = 0;
    s.hops[source] = 0;
    heap.emplace(0, 0, source);
    while (!heap.empty()) {
        auto [d, h, v] = heap.top();
        heap.pop();
        if (s.settled[v] || d != s.dist[v] || h != s.hops[v]) {
            continue;
        }
        if (remaining == 0 && (!want_boundary || (out.boundary_dist != INF && d >= out.boundary_dist))) {
            break;
        }
        s.settled[v] = 1;
        if (s.target[v] != NONE) {
            out.dist[s.target[v]] = d;
            out.parity[s.target[v]] = s.parity[v];
            remaining--;
        }
        for (uint32_t eid : weights.adjacency(v)) {
            const Edge &e = g.edges[eid];
            int64_t nd = d + quantize_weight(weights.weight(eid));
            uint32_t nh = h + 1;
            if (e.is_boundary()) {
                if (std::tie(nd, nh, v) < std::tie(out.boundary_dist, out.boundary_hops, out.boundary_vertex)) {
                    out.boundary_dist = nd;
                    out.boundary_hops = nh;
                    out.boundary_vertex = v;
                    out.boundary_edge = eid;
                    out.boundary_parity = s.parity[v] ^ e.logical_x;
                }
                continue;
            }
            uint32_t o = e.other(v);
            s.touch(o);
            if (s.settled[o]) {
                continue;
            }
            if (std::tie(nd, nh) < std::tie(s.dist[o], s.hops[o])) {
                s.dist[o] = nd;
                s.hops[o] = nh;
                s.parity[o] = s.parity[v] ^ e.logical_x;
                s.pred[o] = eid;
                heap.emplace(nd, nh, o);
            }
        }
    }
    return out;
}

std::string vertex_name(const DetectionGraph &g, uint32_t v) {
    return v < g.num_vertices() ? g.vertices[v].str() : std::to_string(v);
}

}  // namespace

ShortestPath pairwise_distance(const EdgeWeights &weights, uint32_t u, uint32_t v) {
    const auto &g = weights.graph();
    if (u >= g.num_vertices() || (v != BOUNDARY && v >= g.num_vertices())) {
        throw std::invalid_argument("pairwise_distance: vertex out of range");
    }
    ShortestPath path;
    uint32_t walk;
    if (v == BOUNDARY) {
        auto r = search(weights, u, {}, true);
        if (r.boundary_dist == INF) {
            throw std::runtime_error("no path from " + vertex_name(g, u) + " to the boundary");
        }
        path.weight = r.boundary_dist;
        path.logical_x = r.boundary_parity;
        path.edges.push_back(r.boundary_edge);
        walk = r.boundary_vertex;
    } else {
        uint32_t target[1] = {v};
        auto r = search(weights, u, target, false);
        if (r.dist[0] == INF) {
            throw std::runtime_error("no path from " + vertex_name(g, u) + " to " + vertex_name(g, v));
        }
        path.weight = r.dist[0];
        path.logical_x = r.parity[0];
        walk = v;
    }
    while (walk != u) {
        uint32_t eid = scratch.pred[walk];
        path.edges.push_back(eid);
        walk = g.edges[eid].other(walk);
    }
    std::reverse(path.edges.begin(), path.edges.end());
    return path;
}

MatchingMetric::MatchingMetric(const EdgeWeights &weights, std::span<const uint32_t> events)
    : events_(events.begin(), events.end()) {
    size_t n = events_.size();
    dist_.assign(n * n, INF);
    parity_.assign(n * n, 0);
    boundary_dist_.assign(n, INF);
    boundary_parity_.assign(n, 0);
    for (size_t a = 0; a < n; a++) {
        dist_[a * n + a] = 0;
        std::span<const uint32_t> later(events_.data() + a + 1, n - a - 1);
        auto r = search(weights, events_[a], later, true);
        for (size_t k = 0; k < later.size(); k++) {
            size_t b = a + 1 + k;
            dist_[a * n + b] = dist_[b * n + a] = r.dist[k];
            parity_[a * n + b] = parity_[b * n + a] = r.parity[k];
        }
        boundary_dist_[a] = r.boundary_dist;
        boundary_parity_[a] = r.boundary_parity;
    }
}

MatchOutcome mwpm(const DetectionEventSet &events, std::span<const MatchedPair> frozen, const EdgeWeights &weights) {
    const auto &g = weights.graph();
    MatchOutcome out;
    out.frozen.assign(frozen.begin(), frozen.end());
    std::vector<uint32_t> taken;
    for (const auto &f : frozen) {
        taken.push_back(f.a);
        taken.push_back(f.b);
        out.total_weight += quantize_weight(weights.weight(f.edge));
        out.logical_x_correction ^= g.edges[f.edge].logical_x;
    }
    std::sort(taken.begin(), taken.end());
    if (std::adjacent_find(taken.begin(), taken.end()) != taken.end()) {
        throw std::invalid_argument("frozen pairs overlap");
    }
    std::vector<uint32_t> free_events;
    std::set_difference(events.begin(), events.end(), taken.begin(), taken.end(), std::back_inserter(free_events));
    if (free_events.size() + taken.size() != events.size()) {
        throw std::invalid_argument("frozen pair endpoint is not a detection event");
    }
    size_t n = free_events.size();
    if (n == 0) {
        return out;
    }

    MatchingMetric metric(weights, free_events);
    // A pair may be joined directly or by sending both events to the boundary. With an odd count, one
    // extra node stands for a lone boundary match.
    std::vector<int64_t> cost(n * n, INF);
    std::vector<char> via_boundary(n * n, 0);
    std::vector<WeightedPair> pairs;
    int64_t max_cost = 0;
    for (size_t a = 0; a < n; a++) {
        for (size_t b = a + 1; b < n; b++) {
            int64_t c = metric.distance(a, b);
            int64_t ba = metric.boundary_distance(a), bb = metric.boundary_distance(b);
            if (ba != INF && bb != INF && ba + bb < c) {
                c = ba + bb;
                via_boundary[a * n + b] = 1;
            }
            if (c != INF) {
                cost[a * n + b] = c;
                pairs.push_back(WeightedPair{(uint32_t)a, (uint32_t)b, c});
                max_cost = std::max(max_cost, c);
            }
        }
    }
    bool odd = n % 2 == 1;
    if (odd) {
        for (size_t a = 0; a < n; a++) {
            if (metric.boundary_distance(a) != INF) {
                pairs.push_back(WeightedPair{(uint32_t)a, (uint32_t)n, metric.boundary_distance(a)});
                max_cost = std::max(max_cost, metric.boundary_distance(a));
            }
        }
    }
    for (auto &p : pairs) {
        p.weight = max_cost + 1 - p.weight;
    }
    auto mate = max_weight_matching(n + (odd ? 1 : 0), pairs, true);
    for (size_t a = 0; a < mate.size(); a++) {
        if (mate[a] < 0) {
            throw std::runtime_error("detection events admit no perfect matching (" + std::to_string(n) +
                                     " free events)");
        }
    }
    for (size_t a = 0; a < n; a++) {
        size_t b = (size_t)mate[a];
        if (b == n) {
            out.boundary.push_back(free_events[a]);
            out.total_weight += metric.boundary_distance(a);
            out.logical_x_correction ^= metric.boundary_parity(a);
        } else if (a < b) {
            out.total_weight += cost[a * n + b];
            if (via_boundary[a * n + b]) {
                out.boundary.push_back(free_events[a]);
                out.boundary.push_back(free_events[b]);
                out.logical_x_correction ^= metric.boundary_parity(a) ^ metric.boundary_parity(b);
            } else {
                out.pairs.emplace_back(free_events[a], free_events[b]);
                out.logical_x_correction ^= metric.parity(a, b);
            }
        }
    }
    std::sort(out.pairs.begin(), out.pairs.end());
    std::sort(out.boundary.begin(), out.boundary.end());
    return out;
}

namespace {

struct BruteForce {
    const MatchingMetric &m;
    std::vector<int> partner;  // -2 unassigned, -1 boundary
    std::vector<int> best_partner;
    int64_t best = INF;

    void run(int64_t acc) {
        if (acc >= best) {
            return;
        }
        size_t n = m.size();
        size_t i = 0;
        while (i < n && partner[i] != -2) {
            i++;
        }
        if (i == n) {
            best = acc;
            best_partner = partner;
            return;
        }
        if (m.boundary_distance(i) != INF) {
            partner[i] = -1;
            run(acc + m.boundary_distance(i));
            partner[i] = -2;
        }
        for (size_t j = i + 1; j < n; j++) {
            if (partner[j] == -2 && m.distance(i, j) != INF) {
                partner[i] = (int)j;
                partner[j] = (int)i;
                run(acc + m.distance(i, j));
                partner[i] = partner[j] = -2;
            }
        }
    }
};

}  // namespace

MatchOutcome brute_force_mwpm(const MatchingMetric &metric) {
    size_t n = metric.size();
    if (n > 12) {
        throw std::invalid_argument("brute_force_mwpm supports at most 12 events");
    }
    BruteForce bf{metric, std::vector<int>(n, -2), {}, INF};
    bf.run(0);
    MatchOutcome out;
    if (n == 0) {
        return out;
    }
    if (bf.best == INF) {
        throw std::runtime_error("detection events admit no perfect matching");
    }
    out.total_weight = bf.best;
    const auto &ev = metric.events();
    for (size_t a = 0; a < n; a++) {
        int p = bf.best_partner[a];
        if (p == -1) {
            out.boundary.push_back(ev[a]);
            out.logical_x_correction ^= metric.boundary_parity(a);
        } else if ((size_t)p > a) {
            out.pairs.emplace_back(ev[a], ev[p]);
            out.logical_x_correction ^= metric.parity(a, p);
        }
    }
    return out;
}

bool judge_failure(const MatchOutcome &outcome, const ShotResult &truth) {
    std::vector<uint32_t> covered(outcome.boundary.begin(), outcome.boundary.end());
    for (const auto &[a, b] : outcome.pairs) {
        covered.push_back(a);
        covered.push_back(b);
    }
    for (const auto &f : outcome.frozen) {
        covered.push_back(f.a);
        covered.push_back(f.b);
    }
    std::sort(covered.begin(), covered.end());
    if (covered != truth.events) {
        throw std::runtime_error("matching does not cover the shot's detection events exactly");
    }
    return outcome.logical_x_correction != truth.logical_x_flip;
}

}  // namespace pipematch
