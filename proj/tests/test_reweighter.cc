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

#include <cmath>
#include <map>

#include "pipematch/pipeline.h"
#include "pipematch/reweighter.h"

using namespace pipematch;

namespace {

// Path 0 - 1 - 2 - 3 with boundary edges on 0 and 3.
DetectionGraph path_graph() {
    std::vector<Coord3> vs{{0, 0, 0}, {0, 0, 2}, {0, 0, 4}, {0, 0, 6}};
    std::vector<DetectionGraph::WeightedEdge> es{
        {0, 1, 3.0}, {1, 2, 5.0}, {2, 3, 3.0}, {0, BOUNDARY, 4.0}, {3, BOUNDARY, 4.0}};
    return DetectionGraph::from_weighted_edges(vs, es);
}

}  // namespace

TEST(Reweighter, NoVirtualMatchesLeavesWeights) {
    auto g = path_graph();
    auto overlay = reweight(g, PrematchResult{});
    EXPECT_TRUE(overlay.empty());
    EdgeWeights w(g, &overlay);
    for (const auto &e : g.edges) {
        EXPECT_EQ(w.weight(e.id), e.weight);
    }
}

TEST(Reweighter, SingleLinkAddsConditionalProbability) {
    auto g = path_graph();
    uint32_t e01 = g.find_edge(0, 1), e12 = g.find_edge(1, 2);
    g.set_links({{e01, e12, 0.25}});
    PrematchResult virt;
    virt.pairs.push_back({0, 1, e01});
    auto overlay = reweight(g, virt);
    ASSERT_EQ(overlay.entries().size(), 1u);
    const auto *entry = overlay.find(e12);
    ASSERT_NE(entry, nullptr);
    double p_f = std::exp(-5.0) + 0.25;
    EXPECT_DOUBLE_EQ(entry->p_c, 0.25);
    EXPECT_DOUBLE_EQ(entry->p_f, p_f);
    EXPECT_DOUBLE_EQ(entry->weight, -std::log(p_f));
    EXPECT_EQ(overlay.find(e01), nullptr);

    // Adjacency of both endpoints is re-sorted under the new weight.
    EdgeWeights w(g, &overlay);
    EXPECT_EQ(w.adjacency(1).front(), e12);
    EXPECT_EQ(w.adjacency(2).front(), e12);
    EXPECT_EQ(w.adjacency(0).front(), g.adjacency[0].front());
    EXPECT_NE(overlay.dump().find(std::to_string(e12) + " 0.25"), std::string::npos);
}

TEST(Reweighter, LastWriteInCanonicalOrderWins) {
    auto g = path_graph();
    uint32_t e01 = g.find_edge(0, 1), e12 = g.find_edge(1, 2), e23 = g.find_edge(2, 3);
    uint32_t b3 = g.boundary_edge(3);
    g.set_links({{e01, e12, 0.1}, {e23, e12, 0.3}, {b3, e01, 0.05}});
    PrematchResult virt;
    virt.pairs.push_back({0, 1, e01});
    virt.pairs.push_back({2, 3, e23});
    EXPECT_EQ(matched_edges(virt), (std::vector<uint32_t>{e01, e23}));
    auto overlay = reweight(g, virt);
    ASSERT_NE(overlay.find(e12), nullptr);
    EXPECT_DOUBLE_EQ(overlay.find(e12)->p_c, 0.3);

    // Boundary matches reweight through their boundary edge.
    PrematchResult with_boundary;
    with_boundary.boundary.push_back({3, b3});
    EXPECT_EQ(matched_edges(with_boundary), (std::vector<uint32_t>{b3}));
    auto ob = reweight(g, with_boundary);
    ASSERT_NE(ob.find(e01), nullptr);
    EXPECT_DOUBLE_EQ(ob.find(e01)->p_c, 0.05);
}

TEST(Reweighter, ClampsBelowOne) {
    auto g = path_graph();
    uint32_t e01 = g.find_edge(0, 1), e12 = g.find_edge(1, 2);
    g.set_links({{e12, e01, 1.0}});
    PrematchResult virt;
    virt.pairs.push_back({1, 2, e12});
    auto overlay = reweight(g, virt);
    EXPECT_EQ(overlay.clamped(), 1u);
    EXPECT_DOUBLE_EQ(overlay.find(e01)->p_f, 1 - P_F_EPSILON);
    EXPECT_TRUE(std::isfinite(overlay.find(e01)->weight));
    EXPECT_GT(overlay.find(e01)->weight, 0.0);
    EXPECT_THROW(WeightOverlay(g, {{99, 0.1}}), std::invalid_argument);
    EXPECT_THROW(WeightOverlay(g, {{e01, -0.1}}), std::invalid_argument);
}

TEST(Reweighter, StageTwoFollowsReweightedEdge) {
    // x above y at weight 4, z diagonal below y at weight 8, x next to the boundary at weight 2.
    std::vector<Coord3> vs{{0, 0, 1}, {0, 1, 1}, {0, 2, 2}};
    std::vector<DetectionGraph::WeightedEdge> es{{0, 1, 4.0}, {1, 2, 8.0}, {0, BOUNDARY, 2.0}};
    auto g = DetectionGraph::from_weighted_edges(vs, es);
    DetectionEventSet events{0, 1, 2};
    auto stage1 = prematch(events, EdgeWeights(g), PmcMode::Relaxed);
    EXPECT_TRUE(stage1.pairs.empty());
    EXPECT_EQ(run_stage2_prematch(g, WeightOverlay{}, events), stage1);

    WeightOverlay overlay(g, {{g.find_edge(1, 2), 0.5}});
    auto stage2 = run_stage2_prematch(g, overlay, events);
    ASSERT_EQ(stage2.pairs.size(), 1u);
    EXPECT_EQ(stage2.pairs[0], (MatchedPair{1, 2, g.find_edge(1, 2)}));
    ASSERT_EQ(stage2.boundary.size(), 1u);
    EXPECT_EQ(stage2.boundary[0].v, 0u);
    EXPECT_TRUE(run_stage2_prematch(g, overlay, {}).pairs.empty());
}

// On real shots: written edges only get cheaper, the parallel writer agrees with the reference
// whenever no edge is written twice, and otherwise keeps one of the competing values.
TEST(Reweighter, RandomShotProperties) {
    for (CodeFamily family : {CodeFamily::Toric, CodeFamily::Unrotated, CodeFamily::Rotated}) {
        Experiment ex(family, 5, 5, 0.01);
        const auto &g = ex.graph();
        for (uint64_t shot = 0; shot < 200; shot++) {
            ShotResult s = ex.model().sample(21, shot);
            auto virt = prematch(s.events, EdgeWeights(g), PmcMode::Relaxed);
            auto overlay = reweight(g, virt);
            std::map<uint32_t, std::vector<double>> writes;
            for (uint32_t e : matched_edges(virt)) {
                for (const auto &l : g.links_of(e)) {
                    writes[l.correlated].push_back(l.conditional_p);
                }
            }
            ASSERT_EQ(overlay.entries().size(), writes.size());
            for (const auto &entry : overlay.entries()) {
                EXPECT_LE(entry.weight, g.edges[entry.edge].weight);
                EXPECT_DOUBLE_EQ(entry.p_c, writes[entry.edge].back());
            }
            auto par = reweight_parallel(g, virt, 4);
            ASSERT_EQ(par.entries().size(), writes.size());
            for (const auto &entry : par.entries()) {
                const auto &cands = writes[entry.edge];
                if (cands.size() == 1) {
                    EXPECT_EQ(entry.p_c, cands[0]);
                } else {
                    EXPECT_NE(std::find(cands.begin(), cands.end(), entry.p_c), cands.end());
                }
            }
            // Stage separation: reweighting leaves the shared graph alone, stage 2 leaves the overlay alone.
            auto before = overlay.dump();
            run_stage2_prematch(g, overlay, s.events);
            EXPECT_EQ(overlay.dump(), before);
        }
    }
}
