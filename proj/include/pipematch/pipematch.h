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


#ifndef PIPEMATCH_PIPEMATCH_H
#define PIPEMATCH_PIPEMATCH_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define PM_API __declspec(dllexport)
#else
#define PM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
    PM_OK = 0,
    PM_ERR_NULL_ARGUMENT = 1,
    PM_ERR_INVALID_ARGUMENT = 2,
    /* A pre-matching state combination that the transition rules mark as an error. */
    PM_ERR_PREMATCH = 3,
    PM_ERR_RUNTIME = 4,
    PM_ERR_BUFFER_TOO_SMALL = 5,
    PM_ERR_INTERNAL = 6,
} pm_status;

typedef enum {
    PM_FAMILY_TORIC = 0,
    PM_FAMILY_UNROTATED = 1,
    PM_FAMILY_ROTATED = 2,
} pm_family;

typedef struct {
    pm_family family;
    int distance;
    int rounds;
    double p;
    uint64_t shots;
    int correlated;
    int stage2;
    uint64_t seed;
    int workers;
} pm_run_config;

typedef struct {
    uint64_t shots;
    uint64_t failures;
    double p_logical;
    double q_per_round;
    double stderr_q;
} pm_run_stats;

typedef struct pm_experiment pm_experiment;
typedef struct pm_decoder pm_decoder;
typedef struct pm_curves pm_curves;

/* Message of the last failed call on this thread, or "" if none. */
PM_API const char *pm_last_error(void);
PM_API const char *pm_version(void);
/* Frees strings returned through char** out-parameters. */
PM_API void pm_string_free(char *s);

PM_API pm_status pm_parse_family(const char *name, pm_family *out);
PM_API void pm_run_config_init(pm_run_config *config);

/* Monte-Carlo run. */
PM_API pm_status pm_run(const pm_run_config *config, pm_run_stats *out);
/* Monte-Carlo run formatted as a CSV header line plus one row. */
PM_API pm_status pm_run_csv(const pm_run_config *config, char **csv_out);
/* Correlated and uncorrelated decoding of the same shots. Writes q_uncorrelated - q_correlated and its
   standard error. */
PM_API pm_status pm_run_paired(const pm_run_config *config, pm_run_stats *uncorrelated, pm_run_stats *correlated,
                               double *q_difference, double *q_difference_stderr);
/* Runs a key-value sweep description and returns the CSV. */
PM_API pm_status pm_sweep(const char *config_text, char **csv_out);
/* Value of the sweep description's "out" key, or "" if absent. */
PM_API pm_status pm_sweep_output_path(const char *config_text, char **path_out);

/* Splits a result CSV into per-curve "p q_per_round stderr" tables. */
PM_API pm_status pm_curves_from_csv(const char *csv, pm_curves **out);
PM_API size_t pm_curves_count(const pm_curves *curves);
PM_API const char *pm_curves_name(const pm_curves *curves, size_t index);
PM_API const char *pm_curves_body(const pm_curves *curves, size_t index);
PM_API void pm_curves_free(pm_curves *curves);

/* Circuit, noise model and detection graph for one configuration. */
PM_API pm_status pm_experiment_create(pm_family family, int distance, int rounds, double p, pm_experiment **out);
PM_API void pm_experiment_free(pm_experiment *experiment);
PM_API pm_status pm_experiment_num_detectors(const pm_experiment *experiment, size_t *out);
PM_API pm_status pm_experiment_circuit_text(const pm_experiment *experiment, char **out);
PM_API pm_status pm_experiment_graph_text(const pm_experiment *experiment, char **out);
/* Shot dump lines for shots [first, first + count). */
PM_API pm_status pm_experiment_shots_text(const pm_experiment *experiment, uint64_t seed, uint64_t first,
                                          uint64_t count, char **out);
/* Samples one shot. On PM_ERR_BUFFER_TOO_SMALL, *num_events holds the required capacity. */
PM_API pm_status pm_experiment_sample(const pm_experiment *experiment, uint64_t seed, uint64_t shot,
                                      uint32_t *events, size_t capacity, size_t *num_events, int *logical_flip);
/* Decodes every single fault of the noise model in isolation and counts logical failures. */
PM_API pm_status pm_experiment_single_fault_failures(const pm_experiment *experiment, int correlated, int stage2,
                                                     uint64_t *failures);

/* The experiment must outlive the decoder. */
PM_API pm_status pm_decoder_create(const pm_experiment *experiment, int correlated, int stage2, pm_decoder **out);
PM_API void pm_decoder_free(pm_decoder *decoder);
/* events: sorted detector ids. Writes the predicted observable flip and the matching weight. */
PM_API pm_status pm_decoder_decode(const pm_decoder *decoder, const uint32_t *events, size_t num_events,
                                   int *correction, double *weight);
/* Pre-matching state trace and reweighting overlay of the virtual pre-matching for one shot. */
PM_API pm_status pm_decoder_trace(const pm_decoder *decoder, const uint32_t *events, size_t num_events,
                                  char **prematch_trace, char **overlay);

#ifdef __cplusplus
}
#endif

#endif
