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
#include <random>

#include "pipematch/pauli_sim.h"
#include "tableau_oracle.h"

using namespace pipematch;

TEST(PauliSim, XorSorted) {
    std::vector<uint32_t> out;
    std::vector<uint32_t> a{1, 3, 5, 9};
    std::vector<uint32_t> b{3, 4, 9, 12};
    xor_sorted_into(a, b, out);
    EXPECT_EQ(out, (std::vector<uint32_t>{1, 4, 5, 12}));
    xor_sorted_into(a, a, out);
    EXPECT_TRUE(out.empty());
}

// Every single Pauli fault on every gate, compared against a full stabilizer simulation.
TEST(PauliSim, FramePropagationMatchesTableau) {
    for (CodeFamily family : {CodeFamily::Toric, CodeFamily::Unrotated, CodeFamily::Rotated}) {
        Circuit c = build_circuit(family, 3, 2);
        auto clean = oracle::run_tableau(c, 7);
        size_t checked = 0;
        for (const Gate &g : c.gates) {
            for (GatePauli p : channel_paulis(g.kind)) {
                auto faulty = oracle::run_tableau(c, 7, {{g.id, p}});
                ShotResult expected;
                for (uint32_t k = 0; k < clean.detectors.size(); k++) {
                    if (clean.detectors[k] != faulty.detectors[k]) {
                        expected.events.push_back(k);
                    }
                }
                expected.logical_x_flip = clean.observable != faulty.observable;
                ASSERT_EQ(propagate_error(c, g.id, p), expected)
                    << family_name(family) << " gate " << g.id << " " << p.str(g.arity());
                checked++;
            }
        }
        EXPECT_GT(checked, c.gates.size());
    }
}

TEST(PauliSim, PropagateRejectsBadFault) {
    Circuit c = build_circuit(CodeFamily::Unrotated, 3, 1);
    EXPECT_ANY_THROW(propagate_error(c, (uint32_t)c.gates.size(), GatePauli{1, 0}));
    uint32_t single = 0;
    while (c.gates[single].kind == GateKind::CNOT) {
        single++;
    }
    EXPECT_ANY_THROW(propagate_error(c, single, GatePauli{2, 0}));
}

TEST(PauliSim, MechanismsMatchPropagation) {
    Circuit c = build_circuit(CodeFamily::Rotated, 3, 3);
    NoiseModel noise = attach_noise(c, 0.01);
    ErrorModel model(c, noise);
    size_t expected = 0;
    for (const auto &ch : noise) {
        expected += ch.errors.size();
    }
    EXPECT_EQ(model.mechanisms().size(), expected);
    for (const auto &m : model.mechanisms()) {
        ShotResult r = propagate_error(c, m.gate_id, m.pauli);
        EXPECT_EQ(m.events, r.events);
        EXPECT_EQ(m.logical_x_flip, r.logical_x_flip);
    }
    EXPECT_LE(model.max_events_per_error(), 4u);
}

// The effect of a set of faults is the XOR of the individual effects.
TEST(PauliSim, CombineIsLinear) {
    Circuit c = build_circuit(CodeFamily::Unrotated, 3, 3);
    ErrorModel model(c, attach_noise(c, 0.01));
    std::mt19937_64 rng(11);
    size_t m = model.mechanisms().size();
    for (int trial = 0; trial < 200; trial++) {
        std::vector<size_t> subset;
        for (size_t k = 0; k < m; k++) {
            if (rng() % 50 == 0) {
                subset.push_back(k);
            }
        }
        std::vector<uint8_t> det(c.detectors.size(), 0);
        bool flip = false;
        for (size_t k : subset) {
            for (uint32_t e : model.mechanisms()[k].events) {
                det[e] ^= 1;
            }
            flip ^= model.mechanisms()[k].logical_x_flip;
        }
        ShotResult r = model.combine(subset);
        std::vector<uint32_t> expected;
        for (uint32_t k = 0; k < det.size(); k++) {
            if (det[k]) {
                expected.push_back(k);
            }
        }
        EXPECT_EQ(r.events, expected);
        EXPECT_EQ(r.logical_x_flip, flip);
    }
}

TEST(PauliSim, SamplingIsDeterministicPerShot) {
    Circuit c = build_circuit(CodeFamily::Toric, 3, 3);
    ErrorModel model(c, attach_noise(c, 0.02));
    for (uint64_t shot = 0; shot < 50; shot++) {
        std::vector<size_t> f1;
        std::vector<size_t> f2;
        ShotResult a = model.sample(5, shot, &f1);
        ShotResult b = model.sample(5, shot, &f2);
        EXPECT_EQ(a, b);
        EXPECT_EQ(f1, f2);
        EXPECT_EQ(model.combine(f1), a);
    }
    size_t differ = 0;
    for (uint64_t shot = 0; shot < 50; shot++) {
        std::vector<size_t> f1;
        std::vector<size_t> f2;
        model.sample(5, shot, &f1);
        model.sample(6, shot, &f2);
        differ += f1 != f2;
    }
    EXPECT_GT(differ, 40u);
    EXPECT_NE(splitmix64(0), splitmix64(1));
    EXPECT_EQ(shot_rng(3, 4)(), shot_rng(3, 4)());
}

// Each mechanism fires with its own probability (checks the geometric skipping).
TEST(PauliSim, SamplingFrequencies) {
    Circuit c = build_circuit(CodeFamily::Unrotated, 3, 1);
    ErrorModel model(c, attach_noise(c, 0.3));
    const auto &mechs = model.mechanisms();
    std::vector<uint64_t> counts(mechs.size(), 0);
    const uint64_t shots = 20000;
    for (uint64_t s = 0; s < shots; s++) {
        std::vector<size_t> fired;
        model.sample(1, s, &fired);
        for (size_t k : fired) {
            counts[k]++;
        }
    }
    for (size_t k = 0; k < mechs.size(); k++) {
        double p = mechs[k].probability;
        double sigma = std::sqrt(p * (1 - p) / shots);
        EXPECT_NEAR((double)counts[k] / shots, p, 5.5 * sigma) << "mechanism " << k;
    }
}

TEST(PauliSim, FormatShot) {
    Circuit c = build_circuit(CodeFamily::Unrotated, 3, 1);
    ShotResult r{{0, 1}, true};
    std::string text = format_shot(c, r);
    EXPECT_EQ(text, "0," + std::to_string(c.detectors[0].coord.i) + "," + std::to_string(c.detectors[0].coord.j) +
                        " 0," + std::to_string(c.detectors[1].coord.i) + "," +
                        std::to_string(c.detectors[1].coord.j) + " 1");
}
