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


#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <stdexcept>
#include <string>

#include "pipematch/pipematch.h"
#include "pipematch/pipeline.h"

using namespace pipematch;

struct pm_experiment {
    std::unique_ptr<Experiment> experiment;
};

struct pm_decoder {
    const pm_experiment *owner;
    Decoder decoder;
};

struct pm_curves {
    std::vector<std::pair<std::string, std::string>> items;
};

namespace {

thread_local std::string last_error;

pm_status fail(pm_status status, const std::string &message) {
    last_error = message;
    return status;
}

template <typename F>
pm_status guarded(F &&body) {
    try {
        last_error.clear();
        return body();
    } catch (const PrematchError &e) {
        return fail(PM_ERR_PREMATCH, e.what());
    } catch (const std::invalid_argument &e) {
        return fail(PM_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::out_of_range &e) {
        return fail(PM_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::runtime_error &e) {
        return fail(PM_ERR_RUNTIME, e.what());
    } catch (const std::exception &e) {
        return fail(PM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(PM_ERR_INTERNAL, "unknown error");
    }
}

char *copy_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (!out) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

CodeFamily to_family(pm_family f) {
    switch (f) {
        case PM_FAMILY_TORIC:
            return CodeFamily::Toric;
        case PM_FAMILY_UNROTATED:
            return CodeFamily::Unrotated;
        case PM_FAMILY_ROTATED:
            return CodeFamily::Rotated;
    }
    throw std::invalid_argument("unknown code family");
}

RunConfig to_config(const pm_run_config &c) {
    RunConfig r;
    r.family = to_family(c.family);
    r.distance = c.distance;
    r.rounds = c.rounds;
    r.p = c.p;
    r.shots = c.shots;
    r.correlated = c.correlated != 0;
    r.stage2 = c.stage2 != 0;
    r.seed = c.seed;
    r.workers = c.workers;
    return r;
}

void to_stats(const RunStats &s, pm_run_stats *out) {
    out->shots = s.shots;
    out->failures = s.failures;
    out->p_logical = s.P_logical;
    out->q_per_round = s.q_per_round;
    out->stderr_q = s.stderr_q;
}

DetectionEventSet to_events(const pm_decoder *decoder, const uint32_t *events, size_t n) {
    if (n && !events) {
        throw std::invalid_argument("events is null");
    }
    DetectionEventSet out(events, events + n);
    size_t limit = decoder->decoder.graph().num_vertices();
    for (size_t k = 0; k < n; k++) {
        if (out[k] >= limit || (k && out[k] <= out[k - 1])) {
            throw std::invalid_argument("events must be strictly increasing detector ids");
        }
    }
    return out;
}

}  // namespace

#define PM_REQUIRE(ptr)                                              \
    do {                                                             \
        if (!(ptr)) {                                                \
            return fail(PM_ERR_NULL_ARGUMENT, #ptr " must not be null"); \
        }                                                            \
    } while (0)

extern "C" {

const char *pm_last_error(void) {
    return last_error.c_str();
}

const char *pm_version(void) {
    return "1.0.0";
}

void pm_string_free(char *s) {
    std::free(s);
}

pm_status pm_parse_family(const char *name, pm_family *out) {
    PM_REQUIRE(name);
    PM_REQUIRE(out);
    return guarded([&] {
        *out = (pm_family)(int)parse_family(name);
        return PM_OK;
    });
}

void pm_run_config_init(pm_run_config *config) {
    if (!config) {
        return;
    }
    RunConfig d;
    config->family = (pm_family)(int)d.family;
    config->distance = d.distance;
    config->rounds = d.rounds;
    config->p = d.p;
    config->shots = d.shots;
    config->correlated = d.correlated;
    config->stage2 = d.stage2;
    config->seed = d.seed;
    config->workers = d.workers;
}

pm_status pm_run(const pm_run_config *config, pm_run_stats *out) {
    PM_REQUIRE(config);
    PM_REQUIRE(out);
    return guarded([&] {
        to_stats(run(to_config(*config)), out);
        return PM_OK;
    });
}

pm_status pm_run_csv(const pm_run_config *config, char **csv_out) {
    PM_REQUIRE(config);
    PM_REQUIRE(csv_out);
    return guarded([&] {
        auto rc = to_config(*config);
        auto stats = run(rc);
        *csv_out = copy_string(csv_header() + csv_row(rc, stats));
        return PM_OK;
    });
}

pm_status pm_run_paired(const pm_run_config *config, pm_run_stats *uncorrelated, pm_run_stats *correlated,
                        double *q_difference, double *q_difference_stderr) {
    PM_REQUIRE(config);
    PM_REQUIRE(uncorrelated);
    PM_REQUIRE(correlated);
    PM_REQUIRE(q_difference);
    PM_REQUIRE(q_difference_stderr);
    return guarded([&] {
        auto paired = run_paired(to_config(*config));
        to_stats(paired.uncorrelated, uncorrelated);
        to_stats(paired.correlated, correlated);
        *q_difference = paired.q_difference;
        *q_difference_stderr = paired.q_difference_stderr;
        return PM_OK;
    });
}

pm_status pm_sweep(const char *config_text, char **csv_out) {
    PM_REQUIRE(config_text);
    PM_REQUIRE(csv_out);
    return guarded([&] {
        *csv_out = copy_string(run_sweep(parse_sweep_config(config_text)));
        return PM_OK;
    });
}

pm_status pm_sweep_output_path(const char *config_text, char **path_out) {
    PM_REQUIRE(config_text);
    PM_REQUIRE(path_out);
    return guarded([&] {
        *path_out = copy_string(parse_sweep_config(config_text).out);
        return PM_OK;
    });
}

pm_status pm_curves_from_csv(const char *csv, pm_curves **out) {
    PM_REQUIRE(csv);
    PM_REQUIRE(out);
    return guarded([&] {
        auto curves = std::make_unique<pm_curves>();
        for (auto &[name, body] : plot_curves(csv)) {
            curves->items.emplace_back(name, body);
        }
        *out = curves.release();
        return PM_OK;
    });
}

size_t pm_curves_count(const pm_curves *curves) {
    return curves ? curves->items.size() : 0;
}

const char *pm_curves_name(const pm_curves *curves, size_t index) {
    return curves && index < curves->items.size() ? curves->items[index].first.c_str() : nullptr;
}

const char *pm_curves_body(const pm_curves *curves, size_t index) {
    return curves && index < curves->items.size() ? curves->items[index].second.c_str() : nullptr;
}

void pm_curves_free(pm_curves *curves) {
    delete curves;
}

pm_status pm_experiment_create(pm_family family, int distance, int rounds, double p, pm_experiment **out) {
    PM_REQUIRE(out);
    return guarded([&] {
        auto e = std::make_unique<pm_experiment>();
        e->experiment = std::make_unique<Experiment>(to_family(family), distance, rounds, p);
        *out = e.release();
        return PM_OK;
    });
}

void pm_experiment_free(pm_experiment *experiment) {
    delete experiment;
}

pm_status pm_experiment_num_detectors(const pm_experiment *experiment, size_t *out) {
    PM_REQUIRE(experiment);
    PM_REQUIRE(out);
    *out = experiment->experiment->graph().num_vertices();
    return PM_OK;
}

pm_status pm_experiment_circuit_text(const pm_experiment *experiment, char **out) {
    PM_REQUIRE(experiment);
    PM_REQUIRE(out);
    return guarded([&] {
        *out = copy_string(experiment->experiment->circuit().serialize());
        return PM_OK;
    });
}

pm_status pm_experiment_graph_text(const pm_experiment *experiment, char **out) {
    PM_REQUIRE(experiment);
    PM_REQUIRE(out);
    return guarded([&] {
        *out = copy_string(experiment->experiment->graph().dump());
        return PM_OK;
    });
}

pm_status pm_experiment_shots_text(const pm_experiment *experiment, uint64_t seed, uint64_t first, uint64_t count,
                                   char **out) {
    PM_REQUIRE(experiment);
    PM_REQUIRE(out);
    return guarded([&] {
        const auto &ex = *experiment->experiment;
        std::string text;
        for (uint64_t k = first; k < first + count; k++) {
            text += format_shot(ex.circuit(), ex.model().sample(seed, k)) + "\n";
        }
        *out = copy_string(text);
        return PM_OK;
    });
}

pm_status pm_experiment_sample(const pm_experiment *experiment, uint64_t seed, uint64_t shot, uint32_t *events,
                               size_t capacity, size_t *num_events, int *logical_flip) {
    PM_REQUIRE(experiment);
    PM_REQUIRE(num_events);
    PM_REQUIRE(logical_flip);
    return guarded([&] {
        auto s = experiment->experiment->model().sample(seed, shot);
        *num_events = s.events.size();
        *logical_flip = s.logical_x_flip;
        if (s.events.size() > capacity) {
            return fail(PM_ERR_BUFFER_TOO_SMALL, "event buffer too small");
        }
        if (!s.events.empty()) {
            if (!events) {
                return fail(PM_ERR_NULL_ARGUMENT, "events must not be null");
            }
            std::memcpy(events, s.events.data(), s.events.size() * sizeof(uint32_t));
        }
        return PM_OK;
    });
}

pm_status pm_experiment_single_fault_failures(const pm_experiment *experiment, int correlated, int stage2,
                                              uint64_t *failures) {
    PM_REQUIRE(experiment);
    PM_REQUIRE(failures);
    return guarded([&] {
        *failures = single_fault_failures(*experiment->experiment, DecoderOptions{correlated != 0, stage2 != 0});
        return PM_OK;
    });
}

pm_status pm_decoder_create(const pm_experiment *experiment, int correlated, int stage2, pm_decoder **out) {
    PM_REQUIRE(experiment);
    PM_REQUIRE(out);
    return guarded([&] {
        *out = new pm_decoder{experiment, Decoder(experiment->experiment->graph(),
                                                  DecoderOptions{correlated != 0, stage2 != 0})};
        return PM_OK;
    });
}

void pm_decoder_free(pm_decoder *decoder) {
    delete decoder;
}

pm_status pm_decoder_decode(const pm_decoder *decoder, const uint32_t *events, size_t num_events, int *correction,
                            double *weight) {
    PM_REQUIRE(decoder);
    PM_REQUIRE(correction);
    return guarded([&] {
        auto outcome = decoder->decoder.decode(to_events(decoder, events, num_events));
        *correction = outcome.logical_x_correction;
        if (weight) {
            *weight = outcome.weight();
        }
        return PM_OK;
    });
}

pm_status pm_decoder_trace(const pm_decoder *decoder, const uint32_t *events, size_t num_events,
                           char **prematch_trace, char **overlay) {
    PM_REQUIRE(decoder);
    PM_REQUIRE(prematch_trace);
    PM_REQUIRE(overlay);
    return guarded([&] {
        const auto &g = decoder->decoder.graph();
        auto ev = to_events(decoder, events, num_events);
        std::vector<TraceEntry> trace;
        auto virtual_matches = prematch(ev, EdgeWeights(g), decoder->decoder.options().mode, &trace);
        auto ov = reweight(g, virtual_matches);
        char *t = copy_string(format_trace(g, trace));
        try {
            *overlay = copy_string(ov.dump());
        } catch (...) {
            std::free(t);
            throw;
        }
        *prematch_trace = t;
        return PM_OK;
    });
}

}  // extern "C"
