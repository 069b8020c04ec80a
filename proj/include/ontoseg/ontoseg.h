/* Copyright 2026 The ontoseg Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface of the ontology-constrained pseudo-label toolkit.
 *
 * Conventions:
 *   - Every fallible call returns an ontoseg_status; ONTOSEG_OK is 0.
 *   - On failure, ontoseg_last_error() returns a message for the calling
 *     thread. The pointer stays valid until the thread's next failing call.
 *   - Strings returned through char** out-parameters are heap-allocated and
 *     must be released with ontoseg_string_free().
 *   - Objects returned through handle out-parameters must be released with
 *     the matching _free() function. NULL is always safe to free.
 */

#ifndef ONTOSEG_ONTOSEG_H_
#define ONTOSEG_ONTOSEG_H_

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ontoseg_status {
    ONTOSEG_OK = 0,
    ONTOSEG_ERR_IO = 1,
    ONTOSEG_ERR_PARSE = 2,
    ONTOSEG_ERR_VALIDATION = 3,
    ONTOSEG_ERR_ARGUMENT = 4,
    ONTOSEG_ERR_INTERNAL = 5
} ontoseg_status;

const char* ontoseg_version(void);
const char* ontoseg_last_error(void);
void ontoseg_string_free(char* s);

/* ---- Taxonomies ---- */

typedef struct ontoseg_taxonomy ontoseg_taxonomy;

ontoseg_status ontoseg_taxonomy_load(const char* path, ontoseg_taxonomy** out);
ontoseg_status ontoseg_taxonomy_parse(const char* text, ontoseg_taxonomy** out);
void ontoseg_taxonomy_free(ontoseg_taxonomy* tax);

int ontoseg_taxonomy_class_count(const ontoseg_taxonomy* tax);
/* -1 when the taxonomy declares no void class. */
int ontoseg_taxonomy_void_id(const ontoseg_taxonomy* tax);
const char* ontoseg_taxonomy_name(const ontoseg_taxonomy* tax);
/* NULL when id is out of range. */
const char* ontoseg_taxonomy_class_name(const ontoseg_taxonomy* tax, int id);
ontoseg_status ontoseg_taxonomy_class_color(const ontoseg_taxonomy* tax, int id, uint8_t rgb[3]);
/* Case-insensitive; -1 when absent. */
int ontoseg_taxonomy_find_class(const ontoseg_taxonomy* tax, const char* name);

/* ---- Ontologies ---- */

typedef struct ontoseg_ontology ontoseg_ontology;

/* The handle copies both taxonomies and outlives them. */
ontoseg_status ontoseg_ontology_load(const char* path, const ontoseg_taxonomy* extra,
                                     const ontoseg_taxonomy* source, ontoseg_ontology** out);
ontoseg_status ontoseg_ontology_parse(const char* text, const ontoseg_taxonomy* extra,
                                      const ontoseg_taxonomy* source, ontoseg_ontology** out);
void ontoseg_ontology_free(ontoseg_ontology* ont);

/* Diagnostics as one line per finding ("ERROR code subject \"message\"").
 * Returns ONTOSEG_OK even when findings exist; inspect the counts. */
ontoseg_status ontoseg_ontology_validate(const ontoseg_ontology* ont, char** diagnostics,
                                         int* errors, int* warnings);

/* Allowed-set row for a ground-truth class of the extra taxonomy; gt_id 255
 * selects the void row. mask must hold source_class_count bytes; each byte
 * becomes 0 or 1. Fails when the ontology did not pass validation. */
ontoseg_status ontoseg_ontology_allowed(const ontoseg_ontology* ont, int gt_id, uint8_t* mask,
                                        size_t mask_len);

/* One-shot convenience wrapper: load both taxonomies and the ontology, then
 * validate. */
ontoseg_status ontoseg_validate(const char* extra_taxonomy_path,
                                const char* source_taxonomy_path, const char* ontology_path,
                                char** diagnostics, int* errors, int* warnings);

/* ---- Batch refinement ---- */

typedef struct ontoseg_refine_options {
    const char* manifest_path;
    const char* gt_root;             /* NULL: the manifest's directory */
    const char* prediction_root;     /* layout <root>/<frame-id>/<aug>.sftp */
    const char* gt_taxonomy_path;
    const char* source_taxonomy_path;
    const char* ontology_path;       /* NULL: the manifest's declaration */
    const char* output_dir;          /* receives pseudo-labels/ and reports/ */
    const char* augs;                /* comma-separated names; NULL: standard 14 */
    int step;                        /* 0: the manifest's step */
    const char* fallback;            /* "error", "void", "unconstrained"; NULL: "void" */
    int colorize;
    int emit_soft;
    int allow_any_scale;
    int workers;                     /* >= 1 */
} ontoseg_refine_options;

typedef struct ontoseg_refine_stats {
    int64_t frames_total;
    int64_t frames_processed;
    int64_t frames_incomplete;
    int64_t frames_failed;
    int64_t pixels_total;
    int64_t pixels_constrained;
    int64_t pixels_fallback;
    int64_t pixels_changed;
    int64_t renormalized_pixels;
    int subsample_skipped;
} ontoseg_refine_stats;

/* Refines every frame of the manifest. Per-frame failures do not abort the
 * batch; they are counted in stats and listed line by line in failure_lines.
 * stats, aggregate_json and failure_lines may each be NULL. */
ontoseg_status ontoseg_refine_dataset(const ontoseg_refine_options* opts,
                                      ontoseg_refine_stats* stats, char** aggregate_json,
                                      char** failure_lines);

/* ---- Evaluation ---- */

typedef struct ontoseg_evaluate_options {
    const char* pred_manifest_path;
    const char* gt_manifest_path;
    const char* taxonomy_path;
    const char* baseline_json_path;  /* earlier report; NULL: no baseline column */
    int workers;
} ontoseg_evaluate_options;

ontoseg_status ontoseg_evaluate_dataset(const ontoseg_evaluate_options* opts, char** json,
                                        char** text);

/* ---- Simulation ---- */

typedef struct ontoseg_simulate_options {
    const char* fine_taxonomy_path;
    const char* coarse_taxonomy_path;
    const char* ontology_path;       /* coarse -> fine */
    int height;
    int width;
    int num_cells;
    uint64_t seed;
    int trials;
    double sharpness;
    double sigma;
    const char* const* confusions;   /* entries "from:to:strength", class names or ids */
    size_t confusion_count;
    const char* fallback;            /* NULL: "void" */
    const char* triptych_path;       /* NULL: no image */
} ontoseg_simulate_options;

ontoseg_status ontoseg_simulate(const ontoseg_simulate_options* opts, char** report_json);

/* ---- Dataset statistics ---- */

/* inputs are .manifest and .manifestset paths; see the stats subcommand. */
ontoseg_status ontoseg_stats(const char* const* inputs, size_t count, char** text, char** json);

#ifdef __cplusplus
}
#endif

#endif /* ONTOSEG_ONTOSEG_H_ */
