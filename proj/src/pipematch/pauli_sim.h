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

#ifndef PIPEMATCH_PAULI_SIM_H
#define PIPEMATCH_PAULI_SIM_H

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "pipematch/code_circuits.h"

namespace pipematch {

/// Sorted detector ids. Detector ids follow coordinate order, so this is also sorted by Coord3.
using DetectionEventSet = std::vector<uint32_t>;

/// Symmetric difference of two sorted sets, written into `out`.
void xor_sorted_into(std::span<const uint32_t> a, std::span<const uint32_t> b, std::vector<uint32_t> &out);

struct ShotResult {
    DetectionEventSet events;
    bool logical_x_flip = false;

    bool operator==(const ShotResult &) const = default;
};

/// Single fault: one Pauli from one gate's noise channel.
struct ErrorMechanism {
    uint32_t gate_id = 0;
    GatePauli pauli;
    double probability = 0;
    DetectionEventSet events;
    bool logical_x_flip = false;
};

/// Propagates one Pauli fault through an otherwise noiseless circuit by forward Pauli-frame tracking.
/// Faults on Measure gates act just before the measurement; all others act just after the gate.
/// Throws std::invalid_argument if the gate does not exist or cannot produce this Pauli.
ShotResult propagate_error(const Circuit &circuit, uint32_t gate_id, GatePauli pauli);

/// Every fault of a noise model with its detection events and observable flip.
/// Built with a single backward sensitivity sweep over the circuit, so all effects cost one pass.
class ErrorModel {
   public:
    ErrorModel(const Circuit &circuit, const NoiseModel &noise);

    const Circuit &circuit() const {
        return *circuit_;
    }
    const std::vector<ErrorMechanism> &mechanisms() const {
        return mechanisms_;
    }
    /// Largest number of detection events produced by any single fault.
    size_t max_events_per_error() const;

    /// XOR of the effects of the given mechanisms (indices into mechanisms()).
    ShotResult combine(std::span<const size_t> fired) const;

    /// Samples a shot: every mechanism fires independently with its probability.
    /// The stream for a shot depends only on (seed, shot_index).
    ShotResult sample(uint64_t seed, uint64_t shot_index, std::vector<size_t> *fired_out = nullptr) const;

   private:
    const Circuit *circuit_;
    std::vector<ErrorMechanism> mechanisms_;
    // Mechanisms bucketed by identical probability, for geometric skipping.
    std::vector<std::pair<double, std::vector<size_t>>> buckets_;
};

/// Per-shot generator: mt19937_64 seeded from splitmix64(seed, shot_index).
std::mt19937_64 shot_rng(uint64_t seed, uint64_t shot_index);
uint64_t splitmix64(uint64_t x);

/// One line per shot: sorted event coordinates "t,i,j" separated by spaces, then the logical bit.
std::string format_shot(const Circuit &circuit, const ShotResult &shot);

}  // namespace pipematch

#endif
