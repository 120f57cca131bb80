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


#include "pipematch/pipeline.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace pipematch {

MatchOutcome Decoder::decode(const DetectionEventSet &events, DecodeTrace *trace) const {
    const auto &g = *graph_;
    WeightOverlay overlay;
    if (options_.correlated) {
        EdgeWeights base(g);
        auto virtual_matches = prematch(events, base, options_.mode);
        overlay = reweight(g, virtual_matches);
        if (trace) {
            trace->virtual_matches = std::move(virtual_matches);
        }
    }
    EdgeWeights weights(g, options_.correlated ? &overlay : nullptr);
    std::vector<MatchedPair> frozen;
    if (options_.stage2) {
        auto second = prematch(events, weights, options_.mode);
        // Only mutual pairs are frozen. Boundary pre-matches stay free for the exact matcher.
        frozen = second.pairs;
        if (trace) {
            trace->stage2 = std::move(second);
        }
    }
    auto outcome = mwpm(events, frozen, weights);
    if (trace) {
        trace->overlay = std::move(overlay);
    }
    return outcome;
}

Experiment::Experiment(CodeFamily family, int distance, int rounds, double p, GraphOptions graph_options)
    : circuit_(std::make_unique<Circuit>(build_circuit(family, distance, rounds))),
      noise_(attach_noise(*circuit_, p)),
      model_(std::make_unique<ErrorModel>(*circuit_, noise_)),
      graph_(build_detection_graph(*model_, graph_options)) {
}

void RunConfig::validate() const {
    if (distance < 3 || distance % 2 == 0) {
        throw std::invalid_argument("distance must be odd and at least 3");
    }
    if (rounds < 1) {
        throw std::invalid_argument("rounds must be at least 1");
    }
    if (!(p >= 0 && p < 1)) {
        throw std::invalid_argument("p must lie in [0, 1)");
    }
    if (shots < 1) {
        throw std::invalid_argument("shots must be at least 1");
    }
    if (workers < 1) {
        throw std::invalid_argument("workers must be at least 1");
    }
}

double per_round_rate(double P, int rounds) {
    if (rounds < 1) {
        throw std::invalid_argument("rounds must be at least 1");
    }
    if (!(P >= 0 && P < 0.5)) {
        throw std::invalid_argument("per-round back-out needs 0 <= P < 0.5");
    }
    return -std::expm1(std::log1p(-2 * P) / rounds) / 2;
}

double odd_failure_probability(double q, int rounds) {
    return -std::expm1(rounds * std::log1p(-2 * q)) / 2;
}

double per_round_stderr(double P, int rounds, uint64_t shots) {
    double sigma_P = std::sqrt(P * (1 - P) / (double)shots);
    return sigma_P * std::pow(1 - 2 * P, 1.0 / rounds - 1) / rounds;
}

RunStats make_stats(uint64_t shots, uint64_t failures, int rounds) {
    RunStats s;
    s.shots = shots;
    s.failures = failures;
    s.P_logical = (double)failures / (double)shots;
    if (s.P_logical < 0.5) {
        s.q_per_round = per_round_rate(s.P_logical, rounds);
        s.stderr_q = per_round_stderr(s.P_logical, rounds, shots);
    } else {
        // The back-out is undefined once failures saturate.
        s.q_per_round = s.stderr_q = std::nan("");
    }
    return s;
}

uint64_t count_parallel(uint64_t shots, int workers, const std::function<bool(uint64_t)> &shot) {
    constexpr uint64_t CHUNK = 64;
    std::atomic<uint64_t> next{0};
    std::atomic<uint64_t> total{0};
    std::mutex failure_mutex;
    uint64_t failed_index = UINT64_MAX;
    std::exception_ptr failure;

    auto work = [&]() {
        uint64_t local = 0;
        while (true) {
            uint64_t begin = next.fetch_add(CHUNK);
            if (begin >= shots) {
                break;
            }
            uint64_t end = std::min(shots, begin + CHUNK);
            for (uint64_t k = begin; k < end; k++) {
                try {
                    local += shot(k) ? 1 : 0;
                } catch (...) {
                    std::lock_guard<std::mutex> lock(failure_mutex);
                    if (k < failed_index) {
                        failed_index = k;
                        failure = std::current_exception();
                    }
                    next.store(shots);
                    break;
                }
            }
        }
        total += local;
    };
    workers = std::max(1, workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> threads;
        for (int w = 0; w < workers; w++) {
            threads.emplace_back(work);
        }
        for (auto &t : threads) {
            t.join();
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    return total.load();
}

namespace {

[[noreturn]] void rethrow_with_shot(const RunConfig &config, uint64_t shot, const std::exception &e) {
    throw std::runtime_error(std::string(e.what()) + " [seed=" + std::to_string(config.seed) +
                             " shot=" + std::to_string(shot) + "]");
}

}  // namespace

RunStats run(const RunConfig &config) {
    config.validate();
    if (config.p == 0) {
        return make_stats(config.shots, 0, config.rounds);
    }
    Experiment experiment(config.family, config.distance, config.rounds, config.p);
    return run(config, experiment);
}

RunStats run(const RunConfig &config, const Experiment &experiment) {
    config.validate();
    Decoder decoder(experiment.graph(), DecoderOptions{config.correlated, config.stage2});
    uint64_t failures = count_parallel(config.shots, config.workers, [&](uint64_t k) {
        try {
            auto shot = experiment.model().sample(config.seed, k);
            return judge_failure(decoder.decode(shot.events), shot);
        } catch (const std::exception &e) {
            rethrow_with_shot(config, k, e);
        }
    });
    return make_stats(config.shots, failures, config.rounds);
}

PairedStats run_paired(const RunConfig &config) {
    config.validate();
    PairedStats out;
    if (config.p == 0) {
        out.uncorrelated = out.correlated = make_stats(config.shots, 0, config.rounds);
        return out;
    }
    Experiment experiment(config.family, config.distance, config.rounds, config.p);
    Decoder plain(experiment.graph(), DecoderOptions{false, config.stage2});
    Decoder correlated(experiment.graph(), DecoderOptions{true, config.stage2});
    std::atomic<uint64_t> fail_plain{0}, fail_corr{0}, only_plain{0}, only_corr{0};
    count_parallel(config.shots, config.workers, [&](uint64_t k) {
        try {
            auto shot = experiment.model().sample(config.seed, k);
            bool a = judge_failure(plain.decode(shot.events), shot);
            bool b = judge_failure(correlated.decode(shot.events), shot);
            fail_plain += a;
            fail_corr += b;
            only_plain += a && !b;
            only_corr += b && !a;
            return false;
        } catch (const std::exception &e) {
            rethrow_with_shot(config, k, e);
        }
    });
    out.uncorrelated = make_stats(config.shots, fail_plain, config.rounds);
    out.correlated = make_stats(config.shots, fail_corr, config.rounds);
    out.only_uncorrelated = only_plain;
    out.only_correlated = only_corr;
    double n = (double)config.shots;
    double mean = ((double)only_plain - (double)only_corr) / n;
    double var = (((double)only_plain + (double)only_corr) / n - mean * mean) / n;
    double P_mid = (out.uncorrelated.P_logical + out.correlated.P_logical) / 2;
    double slope = std::pow(1 - 2 * P_mid, 1.0 / config.rounds - 1) / config.rounds;
    out.q_difference = out.uncorrelated.q_per_round - out.correlated.q_per_round;
    out.q_difference_stderr = std::sqrt(std::max(0.0, var)) * slope;
    return out;
}

uint64_t single_fault_failures(const Experiment &experiment, const DecoderOptions &options) {
    Decoder decoder(experiment.graph(), options);
    uint64_t failures = 0;
    for (const auto &m : experiment.model().mechanisms()) {
        ShotResult shot{m.events, m.logical_x_flip};
        failures += judge_failure(decoder.decode(shot.events), shot) ? 1 : 0;
    }
    return failures;
}

std::string format_rate(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.5e", x);
    return buf;
}

std::string csv_header() {
    return "family,distance,p,rounds,shots,failures,P_logical,q_per_round,stderr,correlated\n";
}

std::string csv_row(const RunConfig &config, const RunStats &stats) {
    std::ostringstream out;
    out << family_name(config.family) << ',' << config.distance << ',' << format_rate(config.p) << ','
        << config.rounds << ',' << stats.shots << ',' << stats.failures << ',' << format_rate(stats.P_logical) << ','
        << format_rate(stats.q_per_round) << ',' << format_rate(stats.stderr_q) << ','
        << (config.correlated ? "on" : "off") << '\n';
    return out.str();
}

namespace {

std::string trim(const std::string &s) {
    size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
        return "";
    }
    size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::string item;
    for (char c : s + ",") {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!item.empty()) {
                out.push_back(item);
            }
            item.clear();
        } else {
            item += c;
        }
    }
    return out;
}

bool parse_switch(const std::string &key, const std::string &value) {
    if (value == "on" || value == "true" || value == "1") {
        return true;
    }
    if (value == "off" || value == "false" || value == "0") {
        return false;
    }
    throw std::invalid_argument("bad value for " + key + ": " + value);
}

template <typename T>
T parse_number(const std::string &key, const std::string &value) {
    try {
        size_t used = 0;
        T out;
        if constexpr (std::is_same_v<T, double>) {
            out = std::stod(value, &used);
        } else if constexpr (std::is_same_v<T, uint64_t>) {
            if (!value.empty() && value[0] == '-') {
                throw std::invalid_argument("negative");
            }
            out = std::stoull(value, &used);
        } else {
            out = (T)std::stoll(value, &used);
        }
        if (used != value.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return out;
    } catch (const std::exception &) {
        throw std::invalid_argument("bad value for " + key + ": " + value);
    }
}

}  // namespace

SweepConfig parse_sweep_config(const std::string &text) {
    SweepConfig c;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        line_no++;
        auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": expected key = value");
        }
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key == "family" || key == "families") {
            c.families.clear();
            for (const auto &f : split_list(value)) {
                c.families.push_back(parse_family(f));
            }
        } else if (key == "distance" || key == "distances") {
            c.distances.clear();
            for (const auto &d : split_list(value)) {
                c.distances.push_back(parse_number<int>(key, d));
            }
        } else if (key == "p" || key == "ps") {
            c.ps.clear();
            for (const auto &p : split_list(value)) {
                c.ps.push_back(parse_number<double>(key, p));
            }
        } else if (key == "rounds") {
            c.rounds = value == "auto" ? 0 : parse_number<int>(key, value);
            if (value != "auto" && c.rounds < 1) {
                throw std::invalid_argument("rounds must be at least 1 or auto");
            }
        } else if (key == "shots") {
            c.shots = parse_number<uint64_t>(key, value);
        } else if (key == "correlated") {
            if (value == "both") {
                c.correlated = {true, false};
            } else {
                c.correlated = {parse_switch(key, value)};
            }
        } else if (key == "stage2") {
            c.stage2 = parse_switch(key, value);
        } else if (key == "seed") {
            c.seed = parse_number<uint64_t>(key, value);
        } else if (key == "workers") {
            c.workers = parse_number<int>(key, value);
        } else if (key == "max_rounds") {
            c.max_rounds = parse_number<int>(key, value);
        } else if (key == "pilot_shots") {
            c.pilot_shots = parse_number<uint64_t>(key, value);
        } else if (key == "out") {
            c.out = value;
        } else {
            throw std::invalid_argument("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        }
    }
    if (c.families.empty() || c.distances.empty() || c.ps.empty()) {
        throw std::invalid_argument("sweep config needs family, distances and p");
    }
    return c;
}

int choose_rounds(const RunConfig &base, uint64_t pilot_shots, int max_rounds) {
    RunConfig pilot = base;
    pilot.rounds = base.distance;
    pilot.shots = std::max<uint64_t>(1, pilot_shots);
    pilot.correlated = false;
    auto stats = run(pilot);
    if (stats.failures == 0) {
        return max_rounds;
    }
    if (stats.P_logical >= 0.1) {
        return std::clamp((int)std::lround(pilot.rounds * 0.1 / stats.P_logical), 1, max_rounds);
    }
    double q = stats.q_per_round;
    double n = std::log1p(-0.2) / std::log1p(-2 * q);
    return std::clamp((int)std::lround(n), 1, max_rounds);
}

std::string run_sweep(const SweepConfig &config, const std::function<void(const std::string &)> &progress) {
    std::string csv = csv_header();
    for (CodeFamily family : config.families) {
        for (int d : config.distances) {
            for (double p : config.ps) {
                RunConfig rc;
                rc.family = family;
                rc.distance = d;
                rc.p = p;
                rc.shots = config.shots;
                rc.stage2 = config.stage2;
                rc.seed = config.seed;
                rc.workers = config.workers;
                rc.rounds = config.rounds > 0 ? config.rounds : choose_rounds(rc, config.pilot_shots, config.max_rounds);
                std::unique_ptr<Experiment> experiment;
                if (p > 0) {
                    experiment = std::make_unique<Experiment>(family, d, rc.rounds, p);
                }
                for (bool corr : config.correlated) {
                    rc.correlated = corr;
                    auto stats = experiment ? run(rc, *experiment) : make_stats(rc.shots, 0, rc.rounds);
                    auto row = csv_row(rc, stats);
                    csv += row;
                    if (progress) {
                        progress(row);
                    }
                }
            }
        }
    }
    return csv;
}

std::map<std::string, std::string> plot_curves(const std::string &csv) {
    std::istringstream in(csv);
    std::string line;
    std::map<std::string, std::vector<std::pair<double, std::string>>> rows;
    bool header = true;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        if (header) {
            header = false;
            if (line.rfind("family,", 0) == 0) {
                continue;
            }
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 10) {
            throw std::invalid_argument("malformed result row: " + line);
        }
        std::string key = cells[0] + "_d" + cells[1] + (cells[9] == "on" ? "_correlated" : "_uncorrelated");
        double p = parse_number<double>("p", cells[2]);
        rows[key].emplace_back(p, cells[2] + " " + cells[7] + " " + cells[8] + "\n");
    }
    std::map<std::string, std::string> out;
    for (auto &[key, points] : rows) {
        std::stable_sort(points.begin(), points.end(), [](const auto &a, const auto &b) {
            return a.first < b.first;
        });
        std::string text = "# p q_per_round stderr\n";
        for (const auto &pt : points) {
            text += pt.second;
        }
        out[key] = text;
    }
    return out;
}

}  // namespace pipematch
