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


#ifndef PIPEMATCH_PIPELINE_H
#define PIPEMATCH_PIPELINE_H

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "pipematch/code_circuits.h"
#include "pipematch/graph_builder.h"
#include "pipematch/matcher.h"
#include "pipematch/pauli_sim.h"
#include "pipematch/prematcher.h"
#include "pipematch/reweighter.h"

namespace pipematch {

struct DecoderOptions {
    /// Reweight correlated edges from a virtual pre-matching before matching.
    bool correlated = true;
    /// Run a second pre-matching on the reweighted graph and freeze its pairs.
    bool stage2 = false;
    PmcMode mode = PmcMode::Relaxed;
};

/// Per-shot record of the intermediate stages, for dumps and tests.
struct DecodeTrace {
    PrematchResult virtual_matches;
    WeightOverlay overlay;
    PrematchResult stage2;
};

/// The three-stage decoder over a shared, immutable detection graph.
class Decoder {
   public:
    Decoder(const DetectionGraph &graph, DecoderOptions options) : graph_(&graph), options_(options) {
    }

    MatchOutcome decode(const DetectionEventSet &events, DecodeTrace *trace = nullptr) const;

    const DetectionGraph &graph() const {
        return *graph_;
    }
    const DecoderOptions &options() const {
        return options_;
    }

   private:
    const DetectionGraph *graph_;
    DecoderOptions options_;
};

/// Circuit, noise, error model and detection graph for one (family, distance, rounds, p).
class Experiment {
   public:
    Experiment(CodeFamily family, int distance, int rounds, double p, GraphOptions graph_options = {});

    const Circuit &circuit() const {
        return *circuit_;
    }
    const NoiseModel &noise() const {
        return noise_;
    }
    const ErrorModel &model() const {
        return *model_;
    }
    const DetectionGraph &graph() const {
        return graph_;
    }

   private:
    std::unique_ptr<Circuit> circuit_;
    NoiseModel noise_;
    std::unique_ptr<ErrorModel> model_;
    DetectionGraph graph_;
};

struct RunConfig {
    CodeFamily family = CodeFamily::Unrotated;
    int distance = 3;
    int rounds = 3;
    double p = 0.001;
    uint64_t shots = 1000;
    bool correlated = true;
    bool stage2 = false;
    uint64_t seed = 0;
    int workers = 1;

    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

struct RunStats {
    uint64_t shots = 0;
    uint64_t failures = 0;
    double P_logical = 0;
    double q_per_round = 0;
    double stderr_q = 0;
};

/// Per-round failure probability q such that an odd number of failures over N rounds has probability P:
/// q = (1 - (1 - 2P)^(1/N)) / 2. Throws std::invalid_argument unless 0 <= P < 0.5 and N >= 1.
double per_round_rate(double P, int rounds);
/// Forward direction: probability of an odd number of failures in N independent rounds.
double odd_failure_probability(double q, int rounds);
/// Binomial standard error of P carried through per_round_rate.
double per_round_stderr(double P, int rounds, uint64_t shots);
RunStats make_stats(uint64_t shots, uint64_t failures, int rounds);

/// Runs shot indices [0, shots) across workers and returns how many returned true. Each shot's
/// randomness must depend only on its index, so the count does not depend on the worker count.
/// A throwing shot aborts the run; the error from the lowest failing index is rethrown.
uint64_t count_parallel(uint64_t shots, int workers, const std::function<bool(uint64_t)> &shot);

RunStats run(const RunConfig &config);
/// Same as run() on a prebuilt experiment.
RunStats run(const RunConfig &config, const Experiment &experiment);

/// Both decoders on the same sampled shots.
struct PairedStats {
    RunStats uncorrelated;
    RunStats correlated;
    /// Shots where exactly one of the two decoders failed.
    uint64_t only_uncorrelated = 0;
    uint64_t only_correlated = 0;
    /// q_uncorrelated - q_correlated, and its standard error from the discordant-pair variance.
    double q_difference = 0;
    double q_difference_stderr = 0;
};
PairedStats run_paired(const RunConfig &config);

/// Decodes every single fault of the model in isolation and counts logical failures.
uint64_t single_fault_failures(const Experiment &experiment, const DecoderOptions &options);

std::string csv_header();
std::string csv_row(const RunConfig &config, const RunStats &stats);
/// Scientific notation with 6 significant digits.
std::string format_rate(double x);

/// Plain "key = value" lines; '#' starts a comment. Recognized keys: family, distances, p, rounds
/// (an integer or "auto"), shots, correlated (on, off or both), stage2, seed, workers, max_rounds,
/// pilot_shots, out.
struct SweepConfig {
    std::vector<CodeFamily> families;
    std::vector<int> distances;
    std::vector<double> ps;
    int rounds = 0;  // 0 selects rounds adaptively
    uint64_t shots = 1000;
    std::vector<bool> correlated{true, false};
    bool stage2 = false;
    uint64_t seed = 0;
    int workers = 1;
    int max_rounds = 100;
    uint64_t pilot_shots = 2000;
    std::string out;
};
SweepConfig parse_sweep_config(const std::string &text);

/// Picks rounds so the logical failure probability lands near 10%, from a pilot run at N = d.
int choose_rounds(const RunConfig &base, uint64_t pilot_shots, int max_rounds);

/// Runs every (family, distance, p, correlated) combination and returns the CSV text.
std::string run_sweep(const SweepConfig &config, const std::function<void(const std::string &)> &progress = {});

/// Groups CSV rows by (family, distance, correlated). Each curve maps to "p q_per_round stderr" lines
/// sorted by p. Keys look like "unrotated_d3_correlated".
std::map<std::string, std::string> plot_curves(const std::string &csv);

}  // namespace pipematch

#endif
