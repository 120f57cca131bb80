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

#include "pipematch/code_circuits.h"

#include <algorithm>
#include <sstream>
#include <stdexcept>

namespace pipematch {

std::string_view family_name(CodeFamily family) {
    switch (family) {
        case CodeFamily::Toric:
            return "toric";
        case CodeFamily::Unrotated:
            return "unrotated";
        case CodeFamily::Rotated:
            return "rotated";
    }
    throw std::invalid_argument("unknown code family");
}

CodeFamily parse_family(std::string_view text) {
    if (text == "toric") {
        return CodeFamily::Toric;
    }
    if (text == "unrotated") {
        return CodeFamily::Unrotated;
    }
    if (text == "rotated") {
        return CodeFamily::Rotated;
    }
    throw std::invalid_argument("unknown code family '" + std::string(text) + "'; expected toric, unrotated or rotated");
}

std::string_view gate_kind_name(GateKind kind) {
    switch (kind) {
        case GateKind::Init:
            return "INIT";
        case GateKind::Measure:
            return "MEASURE";
        case GateKind::Identity:
            return "I";
        case GateKind::Hadamard:
            return "H";
        case GateKind::CNOT:
            return "CNOT";
    }
    throw std::invalid_argument("unknown gate kind");
}

std::string GatePauli::str(size_t arity) const {
    std::string out;
    for (size_t k = 0; k < arity; k++) {
        bool bx = (x >> k) & 1;
        bool bz = (z >> k) & 1;
        out.push_back(bx ? (bz ? 'Y' : 'X') : (bz ? 'Z' : 'I'));
    }
    return out;
}

GatePauli GatePauli::parse(std::string_view text) {
    if (text.empty() || text.size() > 2) {
        throw std::invalid_argument("bad pauli '" + std::string(text) + "'");
    }
    GatePauli p;
    for (size_t k = 0; k < text.size(); k++) {
        switch (text[k]) {
            case 'I':
                break;
            case 'X':
                p.x |= 1 << k;
                break;
            case 'Y':
                p.x |= 1 << k;
                p.z |= 1 << k;
                break;
            case 'Z':
                p.z |= 1 << k;
                break;
            default:
                throw std::invalid_argument("bad pauli '" + std::string(text) + "'");
        }
    }
    return p;
}

uint32_t Circuit::detector_id(uint32_t ancilla, int t) const {
    if (t < 0 || t > rounds || ancilla >= num_qubits()) {
        return NONE;
    }
    return detector_lookup[(size_t)t * num_qubits() + ancilla];
}

size_t Circuit::count_gates(GateKind kind) const {
    return std::count_if(gates.begin(), gates.end(), [&](const Gate &g) { return g.kind == kind; });
}

std::string Circuit::serialize() const {
    std::ostringstream out;
    out << "# pipematch circuit family=" << family_name(family) << " distance=" << distance << " rounds=" << rounds
        << " height=" << height << " width=" << width << "\n";
    out << "# qubit id = i * width + j; columns: ROUND STEP KIND QUBITS...\n";
    for (const auto &g : gates) {
        out << g.round << ' ' << (int)g.step << ' ' << gate_kind_name(g.kind);
        for (size_t k = 0; k < g.arity(); k++) {
            out << ' ' << g.qubits[k];
        }
        out << '\n';
    }
    return out.str();
}

namespace {

struct Offset {
    int di;
    int dj;
};

// CNOT touch order for each stabilizer type. The X order ends on a horizontal pair (or a diagonal pair
// in the square lattices) so that a single ancilla fault never spreads along the logical X direction.
constexpr std::array<Offset, 4> SQUARE_X_ORDER{{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};  // N W E S
constexpr std::array<Offset, 4> SQUARE_Z_ORDER{{{-1, 0}, {0, 1}, {0, -1}, {1, 0}}};  // N E W S
constexpr std::array<Offset, 4> ROTATED_X_ORDER{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};  // SE SW NE NW
// Both rotated face types share one order. Neighboring faces then touch their two common qubits in
// the same relative order, and the X hook still ends on a horizontal pair.
constexpr std::array<Offset, 4> ROTATED_Z_ORDER{{{1, 1}, {1, -1}, {-1, 1}, {-1, -1}}};  // SE SW NE NW

struct Layout {
    int height = 0;
    int width = 0;
    std::vector<QubitRole> roles;
    // Per ancilla: the data qubit touched at each CNOT step, NONE when idle.
    std::vector<std::array<uint32_t, 4>> schedule;
    std::vector<uint32_t> logical_x;
    std::vector<uint32_t> observable;
};

Layout square_layout(int d, bool periodic) {
    Layout L;
    L.height = L.width = periodic ? 2 * d : 2 * d - 1;
    size_t n = (size_t)L.height * L.width;
    L.roles.resize(n, QubitRole::Unused);
    L.schedule.resize(n, {NONE, NONE, NONE, NONE});
    for (int r = 0; r < L.height; r++) {
        for (int c = 0; c < L.width; c++) {
            size_t q = (size_t)r * L.width + c;
            if ((r + c) % 2 == 0) {
                L.roles[q] = QubitRole::Data;
            } else {
                L.roles[q] = r % 2 == 1 ? QubitRole::ZAncilla : QubitRole::XAncilla;
            }
        }
    }
    for (int r = 0; r < L.height; r++) {
        for (int c = 0; c < L.width; c++) {
            size_t q = (size_t)r * L.width + c;
            if (L.roles[q] == QubitRole::Data) {
                continue;
            }
            const auto &order = L.roles[q] == QubitRole::XAncilla ? SQUARE_X_ORDER : SQUARE_Z_ORDER;
            for (size_t k = 0; k < 4; k++) {
                int rr = r + order[k].di;
                int cc = c + order[k].dj;
                if (periodic) {
                    rr = (rr + L.height) % L.height;
                    cc = (cc + L.width) % L.width;
                } else if (rr < 0 || cc < 0 || rr >= L.height || cc >= L.width) {
                    continue;
                }
                L.schedule[q][k] = (uint32_t)(rr * L.width + cc);
            }
        }
    }
    for (int r = 0; r < L.height; r += 2) {
        L.logical_x.push_back((uint32_t)(r * L.width));
    }
    for (int c = 0; c < L.width; c += 2) {
        L.observable.push_back((uint32_t)c);
    }
    return L;
}

Layout rotated_layout(int d) {
    Layout L;
    L.height = L.width = 2 * d + 1;
    size_t n = (size_t)L.height * L.width;
    L.roles.resize(n, QubitRole::Unused);
    L.schedule.resize(n, {NONE, NONE, NONE, NONE});
    auto id = [&](int r, int c) { return (uint32_t)(r * L.width + c); };
    for (int i = 0; i < d; i++) {
        for (int j = 0; j < d; j++) {
            L.roles[id(2 * i + 1, 2 * j + 1)] = QubitRole::Data;
        }
    }
    // Faces at (2a, 2b). Bulk faces alternate X/Z; the top and bottom boundaries carry weight-2 X faces,
    // the left and right boundaries carry weight-2 Z faces.
    for (int a = 0; a <= d; a++) {
        for (int b = 0; b <= d; b++) {
            bool is_x = (a + b) % 2 == 0;
            bool bulk = a > 0 && a < d && b > 0 && b < d;
            bool top_bottom = (a == 0 || a == d) && b > 0 && b < d;
            bool left_right = (b == 0 || b == d) && a > 0 && a < d;
            bool keep = bulk || (top_bottom && is_x) || (left_right && !is_x);
            if (!keep) {
                continue;
            }
            uint32_t q = id(2 * a, 2 * b);
            L.roles[q] = is_x ? QubitRole::XAncilla : QubitRole::ZAncilla;
            const auto &order = is_x ? ROTATED_X_ORDER : ROTATED_Z_ORDER;
            for (size_t k = 0; k < 4; k++) {
                int rr = 2 * a + order[k].di;
                int cc = 2 * b + order[k].dj;
                if (rr < 0 || cc < 0 || rr >= L.height || cc >= L.width) {
                    continue;
                }
                L.schedule[q][k] = id(rr, cc);
            }
        }
    }
    for (int i = 0; i < d; i++) {
        L.logical_x.push_back(id(2 * i + 1, 1));
        L.observable.push_back(id(1, 2 * i + 1));
    }
    return L;
}

}  // namespace

Circuit build_circuit(CodeFamily family, int distance, int rounds) {
    if (distance < 3 || distance % 2 == 0) {
        throw std::invalid_argument("distance must be odd and >= 3, got " + std::to_string(distance));
    }
    if (rounds < 1) {
        throw std::invalid_argument("rounds must be >= 1, got " + std::to_string(rounds));
    }
    Layout L = family == CodeFamily::Rotated ? rotated_layout(distance)
                                             : square_layout(distance, family == CodeFamily::Toric);

    Circuit c;
    c.family = family;
    c.distance = distance;
    c.rounds = rounds;
    c.height = L.height;
    c.width = L.width;
    c.roles = L.roles;
    c.logical_x_support = L.logical_x;
    c.observable_support = L.observable;
    c.stabilizer_support.resize(c.roles.size());
    for (uint32_t q = 0; q < c.roles.size(); q++) {
        switch (c.roles[q]) {
            case QubitRole::Data:
                c.data_qubits.push_back(q);
                break;
            case QubitRole::XAncilla:
                c.x_ancillas.push_back(q);
                break;
            case QubitRole::ZAncilla:
                c.z_ancillas.push_back(q);
                break;
            case QubitRole::Unused:
                break;
        }
        for (uint32_t dq : L.schedule[q]) {
            if (dq != NONE) {
                c.stabilizer_support[q].push_back(dq);
            }
        }
        std::sort(c.stabilizer_support[q].begin(), c.stabilizer_support[q].end());
    }

    size_t n = c.roles.size();
    std::vector<uint32_t> partner(n);
    auto emit = [&](GateKind kind, uint32_t q0, uint32_t q1, int round, int step) {
        Gate g;
        g.id = (uint32_t)c.gates.size();
        g.kind = kind;
        g.qubits = {q0, q1};
        g.round = (uint32_t)round;
        g.step = (uint8_t)step;
        c.gates.push_back(g);
    };
    for (int round = 0; round < rounds; round++) {
        for (int step = 0; step < STEPS_PER_ROUND; step++) {
            // Control/target pairs of this step, indexed by each participating qubit.
            std::fill(partner.begin(), partner.end(), NONE);
            std::vector<std::pair<uint32_t, uint32_t>> cnots(n, {NONE, NONE});
            if (step >= 2 && step <= 5) {
                size_t k = (size_t)step - 2;
                for (uint32_t a = 0; a < n; a++) {
                    uint32_t dq = L.schedule[a][k];
                    if (dq == NONE) {
                        continue;
                    }
                    std::pair<uint32_t, uint32_t> ct =
                        c.roles[a] == QubitRole::XAncilla ? std::pair{a, dq} : std::pair{dq, a};
                    if (partner[a] != NONE || partner[dq] != NONE) {
                        throw std::logic_error("CNOT schedule reuses a qubit within one step");
                    }
                    partner[a] = dq;
                    partner[dq] = a;
                    cnots[a] = ct;
                    cnots[dq] = ct;
                }
            }
            for (uint32_t q = 0; q < n; q++) {
                QubitRole role = c.roles[q];
                if (role == QubitRole::Unused) {
                    continue;
                }
                if (partner[q] != NONE) {
                    if (q < partner[q]) {
                        emit(GateKind::CNOT, cnots[q].first, cnots[q].second, round, step);
                    }
                    continue;
                }
                bool ancilla = role != QubitRole::Data;
                GateKind kind = GateKind::Identity;
                if (step == 0 && (ancilla || round == 0)) {
                    kind = GateKind::Init;
                } else if (step == STEPS_PER_ROUND - 1 && ancilla) {
                    kind = GateKind::Measure;
                } else if ((step == 1 || step == 6) && role == QubitRole::XAncilla) {
                    kind = GateKind::Hadamard;
                }
                emit(kind, q, NONE, round, step);
            }
        }
    }

    c.detector_lookup.assign((size_t)(rounds + 1) * n, NONE);
    for (uint32_t a : c.z_ancillas) {
        for (int t = 0; t <= rounds; t++) {
            c.detectors.push_back(Detector{Coord3{t, (int32_t)(a / c.width), (int32_t)(a % c.width)}, a,
                                           QubitRole::ZAncilla});
        }
    }
    for (uint32_t a : c.x_ancillas) {
        for (int t = 1; t < rounds; t++) {
            c.detectors.push_back(Detector{Coord3{t, (int32_t)(a / c.width), (int32_t)(a % c.width)}, a,
                                           QubitRole::XAncilla});
        }
    }
    std::sort(c.detectors.begin(), c.detectors.end(),
              [](const Detector &a, const Detector &b) { return a.coord < b.coord; });
    for (uint32_t k = 0; k < c.detectors.size(); k++) {
        const auto &det = c.detectors[k];
        c.detector_lookup[(size_t)det.coord.t * n + det.ancilla] = k;
    }
    return c;
}

std::vector<GatePauli> channel_paulis(GateKind kind) {
    switch (kind) {
        case GateKind::Init:
        case GateKind::Measure:
            return {GatePauli{1, 0}};
        case GateKind::Identity:
        case GateKind::Hadamard:
            return {GatePauli{1, 0}, GatePauli{1, 1}, GatePauli{0, 1}};
        case GateKind::CNOT: {
            // Qubit-0-major order over {I, X, Y, Z} x {I, X, Y, Z} \ {II}.
            constexpr std::array<std::pair<uint8_t, uint8_t>, 4> single{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}};
            std::vector<GatePauli> out;
            for (auto [x0, z0] : single) {
                for (auto [x1, z1] : single) {
                    GatePauli p{(uint8_t)(x0 | (x1 << 1)), (uint8_t)(z0 | (z1 << 1))};
                    if (!p.is_identity()) {
                        out.push_back(p);
                    }
                }
            }
            return out;
        }
    }
    throw std::invalid_argument("unknown gate kind");
}

NoiseModel attach_noise(const Circuit &circuit, double p) {
    if (!(p > 0 && p < 1)) {
        throw std::invalid_argument("physical error rate must lie in (0, 1), got " + std::to_string(p));
    }
    NoiseModel model;
    model.reserve(circuit.gates.size());
    for (const auto &g : circuit.gates) {
        auto paulis = channel_paulis(g.kind);
        double each = p / (double)paulis.size();
        NoiseChannel ch;
        ch.gate_id = g.id;
        for (auto pauli : paulis) {
            ch.errors.push_back(PauliError{pauli, each});
        }
        model.push_back(std::move(ch));
    }
    return model;
}

}  // namespace pipematch
