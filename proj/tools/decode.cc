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


#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pipematch/pipematch.h"

namespace {

struct CliError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void check(pm_status status) {
    if (status != PM_OK) {
        throw CliError(pm_last_error());
    }
}

// Owns a string returned by the library.
struct OwnedString {
    char *ptr = nullptr;
    ~OwnedString() {
        pm_string_free(ptr);
    }
    std::string str() const {
        return ptr ? ptr : "";
    }
};

struct ExperimentHandle {
    pm_experiment *ptr = nullptr;
    ~ExperimentHandle() {
        pm_experiment_free(ptr);
    }
};

struct DecoderHandle {
    pm_decoder *ptr = nullptr;
    ~DecoderHandle() {
        pm_decoder_free(ptr);
    }
};

void write_output(const std::string &path, const std::string &text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw CliError("cannot open " + path + " for writing");
    }
    out << text;
}

std::string read_file(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CliError("cannot read " + path);
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

pm_family family_of(const std::string &name) {
    pm_family f;
    check(pm_parse_family(name.c_str(), &f));
    return f;
}

struct CodeArgs {
    std::string family = "unrotated";
    int distance = 3;
    int rounds = 3;
    double p = 0.001;

    void add(CLI::App *cmd, bool with_p) {
        cmd->add_option("--family", family, "Code family")
            ->check(CLI::IsMember({"toric", "unrotated", "rotated"}))
            ->capture_default_str();
        cmd->add_option("--distance", distance, "Code distance (odd, >= 3)")->capture_default_str();
        cmd->add_option("--rounds", rounds, "Stabilizer measurement rounds")->capture_default_str();
        if (with_p) {
            cmd->add_option("--p", p, "Physical error rate")->capture_default_str();
        }
    }
};

const auto on_off = CLI::IsMember({"on", "off"});

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Correlated matching decoder for surface-code memory experiments"};
    app.require_subcommand(1);

    // run
    auto *run_cmd = app.add_subcommand("run", "Monte-Carlo estimate of the logical failure rate");
    CodeArgs run_code;
    run_code.add(run_cmd, true);
    uint64_t shots = 1000;
    std::string correlated = "on";
    std::string stage2 = "off";
    uint64_t seed = 0;
    int workers = 1;
    std::string out_path;
    run_cmd->add_option("--shots", shots, "Number of shots")->capture_default_str();
    run_cmd->add_option("--correlated", correlated, "Correlated reweighting")->check(on_off)->capture_default_str();
    run_cmd->add_option("--stage2", stage2, "Freeze pairs from a second pre-matching")
        ->check(on_off)
        ->capture_default_str();
    run_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    run_cmd->add_option("--workers", workers, "Worker threads")->capture_default_str();
    run_cmd->add_option("--out", out_path, "Output CSV file (default: stdout)");

    // sweep
    auto *sweep_cmd = app.add_subcommand("sweep", "Run every point of a key-value sweep description");
    std::string sweep_config;
    std::string sweep_out;
    sweep_cmd->add_option("--config", sweep_config, "Sweep description file")->required();
    sweep_cmd->add_option("--out", sweep_out, "Output CSV file (overrides the 'out' key)");

    // plotdata
    auto *plot_cmd = app.add_subcommand("plotdata", "Split a result CSV into per-curve p vs q_per_round files");
    std::string plot_in;
    std::string plot_dir = ".";
    plot_cmd->add_option("--in", plot_in, "Result CSV")->required();
    plot_cmd->add_option("--out-dir", plot_dir, "Directory for the curve files")->capture_default_str();

    // dumps
    auto *circuit_cmd = app.add_subcommand("circuit", "Print the scheduled circuit");
    CodeArgs circuit_code;
    circuit_code.add(circuit_cmd, false);

    auto *graph_cmd = app.add_subcommand("graph", "Print the detection graph, one edge per line");
    CodeArgs graph_code;
    graph_code.add(graph_cmd, true);

    auto *shots_cmd = app.add_subcommand("shots", "Print sampled shots");
    CodeArgs shots_code;
    shots_code.add(shots_cmd, true);
    uint64_t first_shot = 0;
    uint64_t shot_count = 10;
    shots_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    shots_cmd->add_option("--first", first_shot, "First shot index")->capture_default_str();
    shots_cmd->add_option("--count", shot_count, "Number of shots")->capture_default_str();

    auto *trace_cmd = app.add_subcommand("trace", "Pre-matching trace and reweighting overlay of one shot");
    CodeArgs trace_code;
    trace_code.add(trace_cmd, true);
    uint64_t trace_shot = 0;
    trace_cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    trace_cmd->add_option("--shot", trace_shot, "Shot index")->capture_default_str();

    auto *distance_cmd = app.add_subcommand("distance", "Decode every single fault and count logical failures");
    CodeArgs distance_code;
    distance_code.add(distance_cmd, true);
    distance_cmd->add_option("--correlated", correlated, "Correlated reweighting")->check(on_off)->capture_default_str();
    distance_cmd->add_option("--stage2", stage2, "Freeze pairs from a second pre-matching")
        ->check(on_off)
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            pm_run_config config;
            pm_run_config_init(&config);
            config.family = family_of(run_code.family);
            config.distance = run_code.distance;
            config.rounds = run_code.rounds;
            config.p = run_code.p;
            config.shots = shots;
            config.correlated = correlated == "on";
            config.stage2 = stage2 == "on";
            config.seed = seed;
            config.workers = workers;
            OwnedString csv;
            check(pm_run_csv(&config, &csv.ptr));
            write_output(out_path, csv.str());
        } else if (sweep_cmd->parsed()) {
            std::string text = read_file(sweep_config);
            OwnedString csv;
            check(pm_sweep(text.c_str(), &csv.ptr));
            std::string target = sweep_out;
            if (target.empty()) {
                OwnedString configured;
                check(pm_sweep_output_path(text.c_str(), &configured.ptr));
                target = configured.str();
            }
            write_output(target, csv.str());
        } else if (plot_cmd->parsed()) {
            std::string csv = read_file(plot_in);
            pm_curves *curves = nullptr;
            check(pm_curves_from_csv(csv.c_str(), &curves));
            std::filesystem::create_directories(plot_dir);
            for (size_t k = 0; k < pm_curves_count(curves); k++) {
                auto path = std::filesystem::path(plot_dir) / (std::string(pm_curves_name(curves, k)) + ".dat");
                write_output(path.string(), pm_curves_body(curves, k));
                std::cout << path.string() << '\n';
            }
            pm_curves_free(curves);
        } else if (circuit_cmd->parsed()) {
            ExperimentHandle ex;
            check(pm_experiment_create(family_of(circuit_code.family), circuit_code.distance, circuit_code.rounds, 0.001,
                                       &ex.ptr));
            OwnedString text;
            check(pm_experiment_circuit_text(ex.ptr, &text.ptr));
            std::cout << text.str();
        } else if (graph_cmd->parsed()) {
            ExperimentHandle ex;
            check(pm_experiment_create(family_of(graph_code.family), graph_code.distance, graph_code.rounds,
                                       graph_code.p, &ex.ptr));
            OwnedString text;
            check(pm_experiment_graph_text(ex.ptr, &text.ptr));
            std::cout << text.str();
        } else if (shots_cmd->parsed()) {
            ExperimentHandle ex;
            check(pm_experiment_create(family_of(shots_code.family), shots_code.distance, shots_code.rounds,
                                       shots_code.p, &ex.ptr));
            OwnedString text;
            check(pm_experiment_shots_text(ex.ptr, seed, first_shot, shot_count, &text.ptr));
            std::cout << text.str();
        } else if (trace_cmd->parsed()) {
            ExperimentHandle ex;
            check(pm_experiment_create(family_of(trace_code.family), trace_code.distance, trace_code.rounds,
                                       trace_code.p, &ex.ptr));
            size_t n = 0;
            int flip = 0;
            pm_status st = pm_experiment_sample(ex.ptr, seed, trace_shot, nullptr, 0, &n, &flip);
            std::vector<uint32_t> events(n);
            if (st == PM_ERR_BUFFER_TOO_SMALL) {
                check(pm_experiment_sample(ex.ptr, seed, trace_shot, events.data(), events.size(), &n, &flip));
            } else {
                check(st);
            }
            DecoderHandle dec;
            check(pm_decoder_create(ex.ptr, 1, 0, &dec.ptr));
            OwnedString trace, overlay;
            check(pm_decoder_trace(dec.ptr, events.data(), events.size(), &trace.ptr, &overlay.ptr));
            std::cout << "# prematch trace\n" << trace.str() << "# overlay: edge p_c p_f weight\n" << overlay.str();
        } else if (distance_cmd->parsed()) {
            ExperimentHandle ex;
            check(pm_experiment_create(family_of(distance_code.family), distance_code.distance, distance_code.rounds,
                                       distance_code.p, &ex.ptr));
            uint64_t failures = 0;
            check(pm_experiment_single_fault_failures(ex.ptr, correlated == "on", stage2 == "on", &failures));
            std::cout << "single-fault logical failures: " << failures << '\n';
            return failures == 0 ? 0 : 1;
        }
    } catch (const std::exception &e) {
        std::cerr << "decode: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
