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


#ifndef PIPEMATCH_TESTS_TABLEAU_ORACLE_H
#define PIPEMATCH_TESTS_TABLEAU_ORACLE_H

// A small CHP stabilizer simulator, used as an independent reference for the circuits and
// for the Pauli-frame propagation. It is slow (quadratic measurements) and only meant for d=3.

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "pipematch/code_circuits.h"
#include "pipematch/pauli_sim.h"

namespace pipematch::oracle {

class Tableau {
   public:
    explicit Tableau(size_t n) : n_(n), x_(2 * n + 1, std::vector<uint8_t>(n)), z_(2 * n + 1, std::vector<uint8_t>(n)),
                                 r_(2 * n + 1) {
        for (size_t i = 0; i < n; i++) {
            x_[i][i] = 1;
            z_[n + i][i] = 1;
        }
    }

    void h(size_t a) {
        for (size_t i = 0; i < 2 * n_; i++) {
            r_[i] ^= x_[i][a] & z_[i][a];
            std::swap(x_[i][a], z_[i][a]);
        }
    }
    void cnot(size_t a, size_t b) {
        for (size_t i = 0; i < 2 * n_; i++) {
            r_[i] ^= x_[i][a] & z_[i][b] & (x_[i][b] ^ z_[i][a] ^ 1);
            x_[i][b] ^= x_[i][a];
            z_[i][a] ^= z_[i][b];
        }
    }
    void pauli_x(size_t a) {
        for (size_t i = 0; i < 2 * n_; i++) {
            r_[i] ^= z_[i][a];
        }
    }
    void pauli_z(size_t a) {
        for (size_t i = 0; i < 2 * n_; i++) {
            r_[i] ^= x_[i][a];
        }
    }

    /// Z-basis measurement. `deterministic` reports whether the outcome was forced.
    uint8_t measure(size_t a, std::mt19937_64 &rng, bool *deterministic = nullptr) {
        std::optional<size_t> p;
        for (size_t i = n_; i < 2 * n_; i++) {
            if (x_[i][a]) {
                p = i;
                break;
            }
        }
        if (deterministic) {
            *deterministic = !p.has_value();
        }
        if (p) {
            for (size_t i = 0; i < 2 * n_; i++) {
                if (i != *p && x_[i][a]) {
                    rowsum(i, *p);
                }
            }
            x_[*p - n_] = x_[*p];
            z_[*p - n_] = z_[*p];
            r_[*p - n_] = r_[*p];
            std::fill(x_[*p].begin(), x_[*p].end(), 0);
            std::fill(z_[*p].begin(), z_[*p].end(), 0);
            z_[*p][a] = 1;
            r_[*p] = (uint8_t)(rng() & 1);
            return r_[*p];
        }
        size_t s = 2 * n_;
        std::fill(x_[s].begin(), x_[s].end(), 0);
        std::fill(z_[s].begin(), z_[s].end(), 0);
        r_[s] = 0;
        for (size_t i = 0; i < n_; i++) {
            if (x_[i][a]) {
                rowsum(s, i + n_);
            }
        }
        return r_[s];
    }
    void reset(size_t a, std::mt19937_64 &rng) {
        if (measure(a, rng)) {
            pauli_x(a);
        }
    }

   private:
    static int g(uint8_t x1, uint8_t z1, uint8_t x2, uint8_t z2) {
        if (!x1 && !z1) {
            return 0;
        }
        if (x1 && z1) {
            return (int)z2 - (int)x2;
        }
        if (x1) {
            return (int)z2 * (2 * (int)x2 - 1);
        }
        return (int)x2 * (1 - 2 * (int)z2);
    }
    void rowsum(size_t h, size_t i) {
        int sum = 2 * r_[h] + 2 * r_[i];
        for (size_t j = 0; j < n_; j++) {
            sum += g(x_[i][j], z_[i][j], x_[h][j], z_[h][j]);
        }
        sum = ((sum % 4) + 4) % 4;
        r_[h] = sum == 2;
        for (size_t j = 0; j < n_; j++) {
            x_[h][j] ^= x_[i][j];
            z_[h][j] ^= z_[i][j];
        }
    }

    size_t n_;
    std::vector<std::vector<uint8_t>> x_;
    std::vector<std::vector<uint8_t>> z_;
    std::vector<uint8_t> r_;
};

struct TableauRun {
    /// Detector values in detector-id order.
    std::vector<uint8_t> detectors;
    uint8_t observable = 0;
};

struct InjectedFault {
    uint32_t gate_id = 0;
    GatePauli pauli;
};

/// Executes the circuit with injected Paulis (applied before a measurement, after any other gate),
/// followed by a Z readout of every data qubit.
inline TableauRun run_tableau(const Circuit &c, uint64_t seed, const std::vector<InjectedFault> &faults) {
    size_t n = c.num_qubits();
    Tableau tab(n);
    std::mt19937_64 rng(seed);
    std::vector<uint8_t> m((size_t)c.rounds * n, 0);
    std::vector<GatePauli> at(c.gates.size());
    for (const auto &f : faults) {
        at.at(f.gate_id).x ^= f.pauli.x;
        at.at(f.gate_id).z ^= f.pauli.z;
    }
    auto inject = [&](const Gate &gate) {
        GatePauli fault = at[gate.id];
        for (size_t k = 0; k < gate.arity(); k++) {
            if ((fault.x >> k) & 1) {
                tab.pauli_x(gate.qubits[k]);
            }
            if ((fault.z >> k) & 1) {
                tab.pauli_z(gate.qubits[k]);
            }
        }
    };
    for (const Gate &gate : c.gates) {
        bool here = !at[gate.id].is_identity();
        if (here && gate.kind == GateKind::Measure) {
            inject(gate);
        }
        uint32_t q = gate.qubits[0];
        switch (gate.kind) {
            case GateKind::Init:
                tab.reset(q, rng);
                break;
            case GateKind::Measure:
                m[(size_t)gate.round * n + q] = tab.measure(q, rng);
                break;
            case GateKind::Identity:
                break;
            case GateKind::Hadamard:
                tab.h(q);
                break;
            case GateKind::CNOT:
                tab.cnot(q, gate.qubits[1]);
                break;
        }
        if (here && gate.kind != GateKind::Measure) {
            inject(gate);
        }
    }
    std::vector<uint8_t> final_readout(n, 0);
    for (uint32_t q : c.data_qubits) {
        final_readout[q] = tab.measure(q, rng);
    }

    TableauRun out;
    for (const auto &det : c.detectors) {
        int t = det.coord.t;
        uint8_t v = 0;
        if (t < c.rounds) {
            v ^= m[(size_t)t * n + det.ancilla];
        }
        if (t > 0) {
            v ^= m[(size_t)(t - 1) * n + det.ancilla];
        }
        if (t == c.rounds) {
            for (uint32_t dq : c.stabilizer_support[det.ancilla]) {
                v ^= final_readout[dq];
            }
        }
        out.detectors.push_back(v);
    }
    for (uint32_t q : c.observable_support) {
        out.observable ^= final_readout[q];
    }
    return out;
}

inline TableauRun run_tableau(const Circuit &c, uint64_t seed) {
    return run_tableau(c, seed, {});
}

/// Reference effect of a set of faults: detectors and observable that differ from a noiseless run
/// with the same measurement randomness. Pauli faults never change which outcomes are random, so
/// both runs draw the same random bits.
inline ShotResult tableau_fault_effect(const Circuit &c, const std::vector<InjectedFault> &faults, uint64_t seed = 1) {
    TableauRun clean = run_tableau(c, seed);
    TableauRun faulty = run_tableau(c, seed, faults);
    ShotResult out;
    for (uint32_t k = 0; k < clean.detectors.size(); k++) {
        if (clean.detectors[k] != faulty.detectors[k]) {
            out.events.push_back(k);
        }
    }
    out.logical_x_flip = clean.observable != faulty.observable;
    return out;
}

}  // namespace pipematch::oracle

#endif
