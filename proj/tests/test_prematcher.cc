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


#include <gtest/gtest.h>

#include <map>
#include <set>

#include "pipematch/pipeline.h"
#include "pipematch/prematcher.h"
#include "prematch_fixtures.h"

using namespace pipematch;

namespace {

using S = PrematchState;
using oracle::figure_graph;
constexpr uint32_t A_ID = oracle::CELL_A;
constexpr uint32_t B_ID = oracle::CELL_B;

std::vector<uint32_t> fired_neighbors(const DetectionGraph &g, const DetectionEventSet &events, uint32_t v) {
    std::vector<uint32_t> out;
    for (uint32_t e : g.adjacency[v]) {
        uint32_t o = g.edges[e].other(v);
        if (o != BOUNDARY && std::binary_search(events.begin(), events.end(), o)) {
            out.push_back(o);
        }
    }
    return out;
}

void check_result_invariants(const DetectionGraph &g, const DetectionEventSet &events, const PrematchResult &r) {
    std::multiset<uint32_t> covered;
    for (const auto &p : r.pairs) {
        EXPECT_LT(p.a, p.b);
        EXPECT_EQ(g.find_edge(p.a, p.b), p.edge);
        covered.insert(p.a);
        covered.insert(p.b);
    }
    std::set<uint32_t> boundary;
    for (const auto &b : r.boundary) {
        EXPECT_EQ(g.boundary_edge(b.v), b.edge);
        covered.insert(b.v);
        boundary.insert(b.v);
    }
    covered.insert(r.unmatched.begin(), r.unmatched.end());
    EXPECT_EQ(std::vector<uint32_t>(covered.begin(), covered.end()), events);
    // Two adjacent events never both go to the boundary.
    for (uint32_t v : boundary) {
        for (uint32_t u : fired_neighbors(g, events, v)) {
            EXPECT_FALSE(boundary.count(u)) << g.vertices[u].str() << " " << g.vertices[v].str();
        }
    }
}

}  // namespace

TEST(Prematcher, StateTableConformance) {
    const S states[] = {S::ZP, S::HP, S::FP};
    std::set<std::tuple<int, int, int>> cells;
    size_t errors = 0;
    for (Direction dir : {Direction::NeighborBefore, Direction::NeighborAfter}) {
        for (S a : states) {
            for (S b : states) {
                for (bool ref : {false, true}) {
                    EXPECT_EQ(oracle::check_cell(dir, a, b, ref), "");
                    cells.insert({(int)dir, (int)a, (int)b});
                    errors += oracle::expected_cell(dir, a, b, ref).error;
                }
            }
        }
    }
    EXPECT_EQ(cells.size(), 18u);
    // Error outcomes over both reference variants: 11 in the first table and 12 in the second.
    EXPECT_EQ(errors, 23u);
}

TEST(Prematcher, StateTableWorkedCases) {
    // A is HP pointing at the earlier B, which is still ZP: a mutual pair.
    auto pair = transition(A_ID, {S::HP, B_ID}, B_ID, {}, Direction::NeighborBefore);
    EXPECT_FALSE(pair.error);
    EXPECT_EQ(pair.a, (VertexState{S::FP, B_ID}));
    EXPECT_EQ(pair.b, (VertexState{S::FP, A_ID}));
    // A and the later B both ZP: B stores a reference to A.
    auto half = transition(A_ID, {}, B_ID, {}, Direction::NeighborAfter);
    EXPECT_EQ(half.a, VertexState{});
    EXPECT_EQ(half.b, (VertexState{S::HP, A_ID}));
    // Both HP with unrelated references: both reset.
    auto both = transition(A_ID, {S::HP, 3}, B_ID, {S::HP, 4}, Direction::NeighborAfter);
    EXPECT_FALSE(both.error);
    EXPECT_EQ(both.a, VertexState{});
    EXPECT_EQ(both.b, VertexState{});
}

TEST(Prematcher, FigureAdvancingStates) {
    auto g = figure_graph(1.0, 4.0);
    EdgeWeights w(g);
    DetectionEventSet events{0, 1, 2};
    std::vector<TraceEntry> trace;
    auto r = prematch(events, w, PmcMode::Relaxed, &trace);
    ASSERT_EQ(r.pairs.size(), 1u);
    EXPECT_EQ(r.pairs[0].a, 0u);
    EXPECT_EQ(r.pairs[0].b, 1u);
    ASSERT_EQ(r.boundary.size(), 1u);
    EXPECT_EQ(r.boundary[0].v, 2u);
    EXPECT_TRUE(r.unmatched.empty());
    EXPECT_EQ(format_trace(g, trace),
              "(1,1,2) ZP->HP (1,0,0)\n"
              "(1,1,2) HP->FP (1,0,0)\n"
              "(1,0,0) ZP->FP (1,1,2)\n"
              "(2,1,1) ZP->FP B\n");
}

TEST(Prematcher, FigureRevertingStates) {
    auto g = figure_graph(5.0, 4.0);
    EdgeWeights w(g);
    DetectionEventSet events{0, 1, 2};
    std::vector<TraceEntry> trace;
    auto r = prematch(events, w, PmcMode::Relaxed, &trace);
    EXPECT_TRUE(r.pairs.empty());
    ASSERT_EQ(r.boundary.size(), 1u);
    EXPECT_EQ(r.boundary[0].v, 0u);
    EXPECT_EQ(r.unmatched, (std::vector<uint32_t>{1, 2}));
    EXPECT_EQ(format_trace(g, trace),
              "(1,0,0) ZP->FP B\n"
              "(2,1,1) ZP->HP (1,1,2)\n"
              "(2,1,1) HP->ZP -\n");
}

TEST(Prematcher, EqualWeightNeighborsFollowCanonicalOrder) {
    // Vertical weight 4 above and below: the one above is chosen and the choice is mutual.
    std::vector<Coord3> vs{{0, 0, 1}, {0, 1, 1}, {0, 2, 1}};
    std::vector<DetectionGraph::WeightedEdge> es{{0, 1, 4.0}, {1, 2, 4.0}};
    auto g = DetectionGraph::from_weighted_edges(vs, es);
    EdgeWeights w(g);
    Prematcher pm(w, PmcMode::Relaxed);
    pm.reset({0, 1, 2});
    auto c = pm.pmc_choose(1);
    ASSERT_TRUE(c);
    EXPECT_EQ(c->target, 0u);
    auto r = prematch({0, 1, 2}, w, PmcMode::Relaxed);
    ASSERT_EQ(r.pairs.size(), 1u);
    EXPECT_EQ(r.pairs[0], (MatchedPair{0, 1, g.find_edge(0, 1)}));
    EXPECT_EQ(r.unmatched, (std::vector<uint32_t>{2}));

    // Strict mode refuses the tie.
    Prematcher strict(w, PmcMode::Strict);
    strict.reset({0, 1, 2});
    EXPECT_FALSE(strict.pmc_choose(1));
    auto rs = prematch({0, 1, 2}, w, PmcMode::Strict);
    EXPECT_TRUE(rs.pairs.empty());
    EXPECT_EQ(rs.unmatched.size(), 3u);

    // Two diagonal neighbors of weight 8, with horizontal edges of weight 6 to unfired vertices.
    std::vector<Coord3> vd{{0, 0, 0}, {0, 1, 0}, {0, 1, 1}, {0, 1, 2}, {0, 2, 2}};
    std::vector<DetectionGraph::WeightedEdge> ed{{0, 2, 8.0}, {2, 4, 8.0}, {1, 2, 6.0}, {2, 3, 6.0}};
    auto gd = DetectionGraph::from_weighted_edges(vd, ed);
    EdgeWeights wd(gd);
    auto rd = prematch({0, 2, 4}, wd, PmcMode::Relaxed);
    ASSERT_EQ(rd.pairs.size(), 1u);
    EXPECT_EQ(rd.pairs[0].a, 0u);
    EXPECT_EQ(rd.pairs[0].b, 2u);
}

TEST(Prematcher, IsolatedVertexGoesToBoundary) {
    std::vector<Coord3> vs{{0, 0, 0}, {0, 0, 2}};
    std::vector<DetectionGraph::WeightedEdge> es{{0, 1, 1.0}, {0, BOUNDARY, 3.0}};
    auto g = DetectionGraph::from_weighted_edges(vs, es);
    EdgeWeights w(g);
    auto r = prematch({0}, w, PmcMode::Strict);
    ASSERT_EQ(r.boundary.size(), 1u);
    EXPECT_EQ(r.boundary[0].edge, g.boundary_edge(0));
    EXPECT_EQ(prematch({}, w, PmcMode::Relaxed), PrematchResult{});
}

TEST(Prematcher, InconsistentStateRaises) {
    auto g = figure_graph(1.0, 4.0);
    EdgeWeights w(g);
    Prematcher pm(w, PmcMode::Relaxed);
    pm.reset({0, 1, 2});
    pm.process(0);
    pm.process(1);
    EXPECT_EQ(pm.state(0).state, S::FP);
    try {
        pm.process(0);
        FAIL() << "expected PrematchError";
    } catch (const PrematchError &e) {
        EXPECT_NE(std::string(e.what()).find("(1,0,0)"), std::string::npos);
    }
    EXPECT_THROW(pm.process(7), std::invalid_argument);
}

// Shots from real detection graphs: result invariants, purity, work counters, and parallel
// execution reproducing the reference pass and its trace.
TEST(Prematcher, RandomShotsParallelMatchesSerial) {
    for (CodeFamily family : {CodeFamily::Toric, CodeFamily::Unrotated, CodeFamily::Rotated}) {
        for (double p : {0.005, 0.02}) {
            Experiment ex(family, 5, 5, p);
            const auto &g = ex.graph();
            EdgeWeights w(g);
            for (uint64_t shot = 0; shot < 150; shot++) {
                ShotResult s = ex.model().sample(3, shot);
                for (PmcMode mode : {PmcMode::Relaxed, PmcMode::Strict}) {
                    std::vector<TraceEntry> t1;
                    std::vector<TraceEntry> t2;
                    PrematchCounters counters;
                    auto r1 = prematch(s.events, w, mode, &t1, &counters);
                    auto r2 = prematch_parallel(s.events, w, mode, 4, &t2);
                    EXPECT_EQ(r1, r2);
                    EXPECT_EQ(format_trace(g, t1), format_trace(g, t2));
                    EXPECT_EQ(r1, prematch(s.events, w, mode));
                    EXPECT_EQ(counters.vertices_processed, s.events.size());
                    check_result_invariants(g, s.events, r1);
                    for (const auto &e : t1) {
                        if (e.after.state == S::HP) {
                            EXPECT_LT(e.after.partner, e.vertex);
                        }
                    }
                }
            }
        }
    }
}

// Under strict mode a pair is the unique cheapest option of both members.
TEST(Prematcher, StrictPairsAreLocallyOptimal) {
    Experiment ex(CodeFamily::Unrotated, 5, 5, 0.02);
    const auto &g = ex.graph();
    EdgeWeights w(g);
    size_t pairs = 0;
    for (uint64_t shot = 0; shot < 200; shot++) {
        ShotResult s = ex.model().sample(9, shot);
        auto r = prematch(s.events, w, PmcMode::Strict);
        for (const auto &p : r.pairs) {
            double wp = g.edges[p.edge].weight;
            for (uint32_t v : {p.a, p.b}) {
                for (uint32_t e : g.adjacency[v]) {
                    uint32_t o = g.edges[e].other(v);
                    bool fired = o != BOUNDARY && std::binary_search(s.events.begin(), s.events.end(), o);
                    if (e != p.edge && fired) {
                        EXPECT_LT(wp, g.edges[e].weight);
                    }
                }
            }
            pairs++;
        }
    }
    EXPECT_GT(pairs, 0u);
}
