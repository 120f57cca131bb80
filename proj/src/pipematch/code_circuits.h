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

#ifndef PIPEMATCH_CODE_CIRCUITS_H
#define PIPEMATCH_CODE_CIRCUITS_H

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pipematch/coord.h"

namespace pipematch {

enum class CodeFamily : uint8_t { Toric, Unrotated, Rotated };

std::string_view family_name(CodeFamily family);
/// Parses "toric", "unrotated" or "rotated". Throws std::invalid_argument otherwise.
CodeFamily parse_family(std::string_view text);

enum class GateKind : uint8_t { Init, Measure, Identity, Hadamard, CNOT };

std::string_view gate_kind_name(GateKind kind);

enum class QubitRole : uint8_t { Unused, Data, XAncilla, ZAncilla };

/// A Pauli operator acting on the (one or two) qubits of a gate.
/// Bit k of `x` / `z` is the X / Z component on the gate's k-th qubit.
struct GatePauli {
    uint8_t x = 0;
    uint8_t z = 0;

    bool operator==(const GatePauli &) const = default;
    bool is_identity() const {
        return x == 0 && z == 0;
    }
    /// Text form such as "X", "Y", "IZ", "XY". `arity` is the number of gate qubits.
    std::string str(size_t arity) const;
    static GatePauli parse(std::string_view text);
};

struct Gate {
    uint32_t id = 0;
    GateKind kind = GateKind::Identity;
    std::array<uint32_t, 2> qubits{NONE, NONE};
    uint32_t round = 0;
    uint8_t step = 0;

    size_t arity() const {
        return kind == GateKind::CNOT ? 2 : 1;
    }
};

/// Number of time steps per stabilizer measurement round.
constexpr uint8_t STEPS_PER_ROUND = 8;

/// Comparison of consecutive stabilizer measurements (see `Circuit`).
struct Detector {
    Coord3 coord;
    uint32_t ancilla = NONE;
    QubitRole basis = QubitRole::ZAncilla;
};

/// Stabilizer-measurement circuit for a Z-basis memory experiment.
///
/// Qubit ids are row-major lattice positions: id = i * width + j.
/// Detector layers:
///   Z ancilla a, layer 0:          m(a, 0)                      (compared against |0> initialization)
///   Z or X ancilla a, layer t:     m(a, t) xor m(a, t - 1)      for 0 < t < rounds
///   Z ancilla a, layer `rounds`:   m(a, rounds - 1) xor final data readout on supp(a)
/// The final data readout is noiseless and is not part of `gates`.
/// The observable is the Z parity of the final readout on `observable_support`, a top row of data qubits;
/// it flips exactly when an X error chain runs from the top boundary to the bottom boundary.
struct Circuit {
    CodeFamily family = CodeFamily::Unrotated;
    int distance = 3;
    int rounds = 1;
    int height = 0;
    int width = 0;

    std::vector<QubitRole> roles;
    std::vector<Gate> gates;
    std::vector<uint32_t> data_qubits;
    std::vector<uint32_t> x_ancillas;
    std::vector<uint32_t> z_ancillas;
    /// Stabilizer support (data qubit ids) for every ancilla id; empty for other qubits.
    std::vector<std::vector<uint32_t>> stabilizer_support;
    /// A representative logical X operator, running top to bottom.
    std::vector<uint32_t> logical_x_support;
    /// Data qubits whose final Z readout parity is the observable.
    std::vector<uint32_t> observable_support;
    /// Sorted by coordinate; the position in this list is the detector id.
    std::vector<Detector> detectors;

    size_t num_qubits() const {
        return roles.size();
    }
    Coord3 qubit_coord(uint32_t q) const {
        return Coord3{0, (int32_t)(q / (uint32_t)width), (int32_t)(q % (uint32_t)width)};
    }
    /// Detector id for ancilla `a` at layer `t`, or NONE if that detector does not exist.
    uint32_t detector_id(uint32_t ancilla, int t) const;
    size_t count_gates(GateKind kind) const;

    /// Line format: header comment, then one `ROUND STEP KIND QUBITS...` line per gate.
    std::string serialize() const;

    std::vector<uint32_t> detector_lookup;  // (t * num_qubits + ancilla) -> detector id
};

/// Builds the 8-step CNOT schedule for the given family.
/// Throws std::invalid_argument for an even distance, distance < 3 or rounds < 1.
Circuit build_circuit(CodeFamily family, int distance, int rounds);

struct PauliError {
    GatePauli pauli;
    double probability = 0;
};

struct NoiseChannel {
    uint32_t gate_id = 0;
    std::vector<PauliError> errors;
};

using NoiseModel = std::vector<NoiseChannel>;

/// The error Paulis a gate of this kind can suffer, in a fixed order.
std::vector<GatePauli> channel_paulis(GateKind kind);

/// Depolarizing noise of strength p on every gate: 15 two-qubit Paulis at p/15 for CNOT,
/// X/Y/Z at p/3 for single-qubit gates, and a flip with probability p for Init/Measure.
/// Throws std::invalid_argument unless 0 < p < 1.
NoiseModel attach_noise(const Circuit &circuit, double p);

}  // namespace pipematch

#endif
