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

#include "pipematch/pauli_sim.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace pipematch {

namespace {

// Sentinel id marking observable sensitivity inside detector sets. Sorts after every detector id.
constexpr uint32_t OBSERVABLE = 0xFFFFFFFFu;

void check_pauli(const Circuit &circuit, uint32_t gate_id, GatePauli pauli) {
    if (gate_id >= circuit.gates.size()) {
        throw std::invalid_argument("unknown gate id " + std::to_string(gate_id));
    }
    const auto &g = circuit.gates[gate_id];
    auto allowed = channel_paulis(g.kind);
    if (!pauli.is_identity() && std::find(allowed.begin(), allowed.end(), pauli) == allowed.end()) {
        throw std::invalid_argument("pauli " + pauli.str(g.arity()) + " is not in the noise channel of gate " +
                                    std::to_string(gate_id) + " (" + std::string(gate_kind_name(g.kind)) + ")");
    }
}

// Detectors that read measurement m(ancilla, round).
std::vector<uint32_t> measurement_detectors(const Circuit &c, uint32_t ancilla, int round) {
    std::vector<uint32_t> out;
    for (int t : {round, round + 1}) {
        uint32_t d = c.detector_id(ancilla, t);
        if (d != NONE) {
            out.push_back(d);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

void xor_into(std::vector<uint32_t> &target, std::span<const uint32_t> other, std::vector<uint32_t> &scratch) {
    if (other.empty()) {
        return;
    }
    xor_sorted_into(target, other, scratch);
    target.swap(scratch);
}

}  // namespace

void xor_sorted_into(std::span<const uint32_t> a, std::span<const uint32_t> b, std::vector<uint32_t> &out) {
    out.clear();
    size_t i = 0;
    size_t j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else if (b[j] < a[i]) {
            out.push_back(b[j++]);
        } else {
            i++;
            j++;
        }
    }
    out.insert(out.end(), a.begin() + (ptrdiff_t)i, a.end());
    out.insert(out.end(), b.begin() + (ptrdiff_t)j, b.end());
}

ShotResult propagate_error(const Circuit &circuit, uint32_t gate_id, GatePauli pauli) {
    check_pauli(circuit, gate_id, pauli);
    size_t n = circuit.num_qubits();
    std::vector<uint8_t> fx(n, 0);
    std::vector<uint8_t> fz(n, 0);
    std::vector<uint8_t> flips((size_t)circuit.rounds * n, 0);

    const Gate &origin = circuit.gates[gate_id];
    for (size_t k = 0; k < origin.arity(); k++) {
        fx[origin.qubits[k]] ^= (pauli.x >> k) & 1;
        fz[origin.qubits[k]] ^= (pauli.z >> k) & 1;
    }
    size_t start = origin.kind == GateKind::Measure ? gate_id : gate_id + 1;
    for (size_t k = start; k < circuit.gates.size(); k++) {
        const Gate &g = circuit.gates[k];
        uint32_t q = g.qubits[0];
        switch (g.kind) {
            case GateKind::Init:
                fx[q] = 0;
                fz[q] = 0;
                break;
            case GateKind::Measure:
                flips[(size_t)g.round * n + q] = fx[q];
                break;
            case GateKind::Identity:
                break;
            case GateKind::Hadamard:
                std::swap(fx[q], fz[q]);
                break;
            case GateKind::CNOT: {
                uint32_t t = g.qubits[1];
                fx[t] ^= fx[q];
                fz[q] ^= fz[t];
                break;
            }
        }
    }

    ShotResult out;
    for (uint32_t k = 0; k < circuit.detectors.size(); k++) {
        const auto &det = circuit.detectors[k];
        int t = det.coord.t;
        uint32_t a = det.ancilla;
        uint8_t v = 0;
        if (t < circuit.rounds) {
            v ^= flips[(size_t)t * n + a];
        }
        if (t > 0) {
            v ^= flips[(size_t)(t - 1) * n + a];
        }
        if (t == circuit.rounds) {
            for (uint32_t dq : circuit.stabilizer_support[a]) {
                v ^= fx[dq];
            }
        }
        if (v) {
            out.events.push_back(k);
        }
    }
    for (uint32_t q : circuit.observable_support) {
        out.logical_x_flip ^= fx[q] != 0;
    }
    return out;
}

ErrorModel::ErrorModel(const Circuit &circuit, const NoiseModel &noise) : circuit_(&circuit) {
    size_t n = circuit.num_qubits();
    std::vector<const NoiseChannel *> channel_of(circuit.gates.size(), nullptr);
    for (const auto &ch : noise) {
        if (ch.gate_id >= circuit.gates.size()) {
            throw std::invalid_argument("noise channel refers to unknown gate " + std::to_string(ch.gate_id));
        }
        for (const auto &e : ch.errors) {
            check_pauli(circuit, ch.gate_id, e.pauli);
        }
        channel_of[ch.gate_id] = &ch;
    }
    std::vector<size_t> first_mechanism(circuit.gates.size() + 1, 0);
    for (size_t g = 0; g < circuit.gates.size(); g++) {
        first_mechanism[g + 1] = first_mechanism[g] + (channel_of[g] ? channel_of[g]->errors.size() : 0);
    }
    mechanisms_.resize(first_mechanism.back());

    std::vector<std::vector<uint32_t>> sens_x(n);
    std::vector<std::vector<uint32_t>> sens_z(n);
    std::vector<uint32_t> scratch;
    std::vector<uint8_t> on_observable(n, 0);
    for (uint32_t q : circuit.observable_support) {
        on_observable[q] = 1;
    }
    for (uint32_t a : circuit.z_ancillas) {
        uint32_t det = circuit.detector_id(a, circuit.rounds);
        for (uint32_t dq : circuit.stabilizer_support[a]) {
            sens_x[dq].push_back(det);
        }
    }
    for (uint32_t q : circuit.data_qubits) {
        if (on_observable[q]) {
            sens_x[q].push_back(OBSERVABLE);
        }
        std::sort(sens_x[q].begin(), sens_x[q].end());
    }

    auto record = [&](const Gate &g) {
        const NoiseChannel *ch = channel_of[g.id];
        if (!ch) {
            return;
        }
        std::vector<uint32_t> acc;
        for (size_t e = 0; e < ch->errors.size(); e++) {
            const auto &err = ch->errors[e];
            acc.clear();
            for (size_t k = 0; k < g.arity(); k++) {
                uint32_t q = g.qubits[k];
                if ((err.pauli.x >> k) & 1) {
                    xor_into(acc, sens_x[q], scratch);
                }
                if ((err.pauli.z >> k) & 1) {
                    xor_into(acc, sens_z[q], scratch);
                }
            }
            ErrorMechanism &m = mechanisms_[first_mechanism[g.id] + e];
            m.gate_id = g.id;
            m.pauli = err.pauli;
            m.probability = err.probability;
            m.logical_x_flip = !acc.empty() && acc.back() == OBSERVABLE;
            if (m.logical_x_flip) {
                acc.pop_back();
            }
            m.events = acc;
        }
    };

    for (size_t k = circuit.gates.size(); k-- > 0;) {
        const Gate &g = circuit.gates[k];
        uint32_t q = g.qubits[0];
        switch (g.kind) {
            case GateKind::Init:
                record(g);
                sens_x[q].clear();
                sens_z[q].clear();
                break;
            case GateKind::Measure: {
                auto dets = measurement_detectors(circuit, q, (int)g.round);
                xor_into(sens_x[q], dets, scratch);
                record(g);
                break;
            }
            case GateKind::Identity:
                record(g);
                break;
            case GateKind::Hadamard:
                record(g);
                std::swap(sens_x[q], sens_z[q]);
                break;
            case GateKind::CNOT: {
                record(g);
                uint32_t t = g.qubits[1];
                xor_into(sens_x[q], sens_x[t], scratch);
                xor_into(sens_z[t], sens_z[q], scratch);
                break;
            }
        }
    }

    std::map<double, std::vector<size_t>> by_probability;
    for (size_t k = 0; k < mechanisms_.size(); k++) {
        by_probability[mechanisms_[k].probability].push_back(k);
    }
    for (auto &[p, ids] : by_probability) {
        buckets_.emplace_back(p, std::move(ids));
    }
}

size_t ErrorModel::max_events_per_error() const {
    size_t best = 0;
    for (const auto &m : mechanisms_) {
        best = std::max(best, m.events.size());
    }
    return best;
}

ShotResult ErrorModel::combine(std::span<const size_t> fired) const {
    ShotResult out;
    std::vector<uint32_t> all;
    for (size_t k : fired) {
        const auto &m = mechanisms_.at(k);
        all.insert(all.end(), m.events.begin(), m.events.end());
        out.logical_x_flip ^= m.logical_x_flip;
    }
    std::sort(all.begin(), all.end());
    for (size_t i = 0; i < all.size();) {
        size_t j = i;
        while (j < all.size() && all[j] == all[i]) {
            j++;
        }
        if ((j - i) % 2 == 1) {
            out.events.push_back(all[i]);
        }
        i = j;
    }
    return out;
}

uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::mt19937_64 shot_rng(uint64_t seed, uint64_t shot_index) {
    return std::mt19937_64(splitmix64(splitmix64(seed) + shot_index));
}

ShotResult ErrorModel::sample(uint64_t seed, uint64_t shot_index, std::vector<size_t> *fired_out) const {
    auto rng = shot_rng(seed, shot_index);
    auto uniform_open_closed = [&]() { return (double)((rng() >> 11) + 1) * 0x1.0p-53; };
    std::vector<size_t> fired;
    for (const auto &[p, ids] : buckets_) {
        if (p <= 0) {
            continue;
        }
        if (p >= 1) {
            fired.insert(fired.end(), ids.begin(), ids.end());
            continue;
        }
        double log_miss = std::log1p(-p);
        size_t k = 0;
        while (true) {
            double skip = std::floor(std::log(uniform_open_closed()) / log_miss);
            if (skip >= (double)(ids.size() - k)) {
                break;
            }
            k += (size_t)skip;
            fired.push_back(ids[k]);
            k++;
        }
    }
    std::sort(fired.begin(), fired.end());
    ShotResult out = combine(fired);
    if (fired_out) {
        *fired_out = std::move(fired);
    }
    return out;
}

std::string format_shot(const Circuit &circuit, const ShotResult &shot) {
    std::ostringstream out;
    for (uint32_t d : shot.events) {
        const auto &c = circuit.detectors.at(d).coord;
        out << c.t << ',' << c.i << ',' << c.j << ' ';
    }
    out << (shot.logical_x_flip ? 1 : 0);
    return out.str();
}

}  // namespace pipematch
