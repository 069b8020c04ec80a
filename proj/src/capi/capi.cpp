// Copyright 2026 The ontoseg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ontoseg/ontoseg.h"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "core/error.hpp"
#include "core/manifest.hpp"
#include "core/ontology.hpp"
#include "core/pipeline.hpp"
#include "core/simulate.hpp"
#include "core/taxonomy.hpp"
#include "core/text.hpp"

struct ontoseg_taxonomy {
    ontoseg::Taxonomy value;
};

struct ontoseg_ontology {
    ontoseg::Taxonomy extra;
    ontoseg::Taxonomy source;
    ontoseg::OntologyRelation relation;
    std::optional<ontoseg::ConstraintTable> table;
    std::string table_error;
};

namespace {

thread_local std::string t_last_error;

void set_error(const std::string& msg) { t_last_error = msg; }

ontoseg_status map_code(ontoseg::ErrorCode code) {
    switch (code) {
        case ontoseg::ErrorCode::io: return ONTOSEG_ERR_IO;
        case ontoseg::ErrorCode::parse: return ONTOSEG_ERR_PARSE;
        case ontoseg::ErrorCode::validation: return ONTOSEG_ERR_VALIDATION;
        case ontoseg::ErrorCode::invalid_argument: return ONTOSEG_ERR_ARGUMENT;
        case ontoseg::ErrorCode::internal: return ONTOSEG_ERR_INTERNAL;
    }
    return ONTOSEG_ERR_INTERNAL;
}

template <typename F>
ontoseg_status wrap(F&& f) {
    try {
        f();
        return ONTOSEG_OK;
    } catch (const ontoseg::Error& e) {
        set_error(e.what());
        return map_code(e.code());
    } catch (const std::exception& e) {
        set_error(e.what());
        return ONTOSEG_ERR_INTERNAL;
    } catch (...) {
        set_error("unknown error");
        return ONTOSEG_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool cond, const char* message) {
    if (!cond) throw ontoseg::argument_error(message);
}

std::vector<std::string> split_csv(const char* list) {
    std::vector<std::string> out;
    for (std::string_view part : ontoseg::text::split_on(list, ',')) {
        auto trimmed = ontoseg::text::trim(part);
        if (!trimmed.empty()) out.emplace_back(trimmed);
    }
    return out;
}

ontoseg::FallbackPolicy parse_fallback(const char* name) {
    if (name == nullptr) return ontoseg::FallbackPolicy::Void;
    auto policy = ontoseg::fallback_from_name(name);
    if (!policy)
        throw ontoseg::argument_error(std::string("unknown fallback policy '") + name + "'");
    return *policy;
}

int resolve_class(const ontoseg::Taxonomy& tax, std::string_view token) {
    if (auto id = ontoseg::text::parse_int(token); id && *id >= 0 && *id < tax.class_count())
        return static_cast<int>(*id);
    if (auto id = tax.find(token)) return *id;
    throw ontoseg::argument_error("unknown class '" + std::string(token) + "' in taxonomy '" +
                                  tax.name() + "'");
}

}  // namespace

extern "C" {

const char* ontoseg_version(void) { return "0.1.0"; }

const char* ontoseg_last_error(void) { return t_last_error.c_str(); }

void ontoseg_string_free(char* s) { std::free(s); }

ontoseg_status ontoseg_taxonomy_load(const char* path, ontoseg_taxonomy** out) {
    return wrap([&] {
        require(path != nullptr && out != nullptr, "null argument");
        *out = new ontoseg_taxonomy{ontoseg::load_taxonomy(path)};
    });
}

ontoseg_status ontoseg_taxonomy_parse(const char* tex, ontoseg_taxonomy** out) {
    return wrap([&] {
        require(tex != nullptr && out != nullptr, "null argument");
        *out = new ontoseg_taxonomy{ontoseg::parse_taxonomy(tex)};
    });
}

void ontoseg_taxonomy_free(ontoseg_taxonomy* tax) { delete tax; }

int ontoseg_taxonomy_class_count(const ontoseg_taxonomy* tax) {
    return tax == nullptr ? 0 : tax->value.class_count();
}

int ontoseg_taxonomy_void_id(const ontoseg_taxonomy* tax) {
    if (tax == nullptr) return -1;
    return tax->value.void_id().value_or(-1);
}

const char* ontoseg_taxonomy_name(const ontoseg_taxonomy* tax) {
    return tax == nullptr ? nullptr : tax->value.name().c_str();
}

const char* ontoseg_taxonomy_class_name(const ontoseg_taxonomy* tax, int id) {
    if (tax == nullptr || id < 0 || id >= tax->value.class_count()) return nullptr;
    return tax->value.class_at(id).name.c_str();
}

ontoseg_status ontoseg_taxonomy_class_color(const ontoseg_taxonomy* tax, int id, uint8_t rgb[3]) {
    return wrap([&] {
        require(tax != nullptr && rgb != nullptr, "null argument");
        const ontoseg::ClassDef& def = tax->value.class_at(id);
        rgb[0] = def.color.r;
        rgb[1] = def.color.g;
        rgb[2] = def.color.b;
    });
}

int ontoseg_taxonomy_find_class(const ontoseg_taxonomy* tax, const char* name) {
    if (tax == nullptr || name == nullptr) return -1;
    return tax->value.find(name).value_or(-1);
}

static ontoseg_status make_ontology(const char* path_or_text, bool is_path,
                                    const ontoseg_taxonomy* extra, const ontoseg_taxonomy* source,
                                    ontoseg_ontology** out) {
    return wrap([&] {
        require(path_or_text != nullptr && extra != nullptr && source != nullptr && out != nullptr,
                "null argument");
        ontoseg::OntologyRelation relation =
            is_path ? ontoseg::load_ontology(path_or_text, extra->value, source->value)
                    : ontoseg::parse_ontology(path_or_text, extra->value, source->value);
        auto handle = std::unique_ptr<ontoseg_ontology>(new ontoseg_ontology{
            extra->value, source->value, std::move(relation), std::nullopt, {}});
        try {
            handle->table = ontoseg::build_constraint_table(handle->relation, handle->extra,
                                                            handle->source);
        } catch (const ontoseg::Error& e) {
            handle->table_error = e.what();
        }
        *out = handle.release();
    });
}

ontoseg_status ontoseg_ontology_load(const char* path, const ontoseg_taxonomy* extra,
                                     const ontoseg_taxonomy* source, ontoseg_ontology** out) {
    return make_ontology(path, true, extra, source, out);
}

ontoseg_status ontoseg_ontology_parse(const char* tex, const ontoseg_taxonomy* extra,
                                      const ontoseg_taxonomy* source, ontoseg_ontology** out) {
    return make_ontology(tex, false, extra, source, out);
}

void ontoseg_ontology_free(ontoseg_ontology* ont) { delete ont; }

ontoseg_status ontoseg_ontology_validate(const ontoseg_ontology* ont, char** diagnostics,
                                         int* errors, int* warnings) {
    return wrap([&] {
        require(ont != nullptr, "null argument");
        ontoseg::Diagnostics diags =
            ontoseg::validate_ontology(ont->relation, ont->extra, ont->source);
        if (errors != nullptr) *errors = ontoseg::error_count(diags);
        if (warnings != nullptr) *warnings = ontoseg::warning_count(diags);
        if (diagnostics != nullptr) *diagnostics = dup_string(ontoseg::format_diagnostics(diags));
    });
}

ontoseg_status ontoseg_ontology_allowed(const ontoseg_ontology* ont, int gt_id, uint8_t* mask,
                                        size_t mask_len) {
    return wrap([&] {
        require(ont != nullptr && mask != nullptr, "null argument");
        if (!ont->table) throw ontoseg::validation_error(ont->table_error);
        require(mask_len >= static_cast<size_t>(ont->table->source_class_count()),
                "mask buffer too small");
        const ontoseg::ClassSet& row = ont->table->row_for(gt_id);
        for (int c = 0; c < ont->table->source_class_count(); ++c)
            mask[c] = row.test(c) ? 1 : 0;
    });
}

ontoseg_status ontoseg_validate(const char* extra_taxonomy_path, const char* source_taxonomy_path,
                                const char* ontology_path, char** diagnostics, int* errors,
                                int* warnings) {
    return wrap([&] {
        require(extra_taxonomy_path != nullptr && source_taxonomy_path != nullptr &&
                    ontology_path != nullptr,
                "null argument");
        ontoseg::Taxonomy extra = ontoseg::load_taxonomy(extra_taxonomy_path);
        ontoseg::Taxonomy source = ontoseg::load_taxonomy(source_taxonomy_path);
        ontoseg::OntologyRelation relation = ontoseg::load_ontology(ontology_path, extra, source);
        ontoseg::Diagnostics diags = ontoseg::validate_ontology(relation, extra, source);
        if (errors != nullptr) *errors = ontoseg::error_count(diags);
        if (warnings != nullptr) *warnings = ontoseg::warning_count(diags);
        if (diagnostics != nullptr) *diagnostics = dup_string(ontoseg::format_diagnostics(diags));
    });
}

ontoseg_status ontoseg_refine_dataset(const ontoseg_refine_options* c_opts,
                                      ontoseg_refine_stats* stats, char** aggregate_json,
                                      char** failure_lines) {
    return wrap([&] {
        require(c_opts != nullptr, "null argument");
        require(c_opts->manifest_path != nullptr, "manifest_path is required");
        require(c_opts->prediction_root != nullptr, "prediction_root is required");
        require(c_opts->gt_taxonomy_path != nullptr, "gt_taxonomy_path is required");
        require(c_opts->source_taxonomy_path != nullptr, "source_taxonomy_path is required");
        require(c_opts->output_dir != nullptr, "output_dir is required");
        require(c_opts->workers >= 1, "workers must be at least 1");
        require(c_opts->step >= 0, "step must not be negative");

        ontoseg::RefineJobOptions opts;
        opts.manifest_path = c_opts->manifest_path;
        if (c_opts->gt_root != nullptr) opts.gt_root = c_opts->gt_root;
        opts.prediction_root = c_opts->prediction_root;
        opts.gt_taxonomy_path = c_opts->gt_taxonomy_path;
        opts.source_taxonomy_path = c_opts->source_taxonomy_path;
        if (c_opts->ontology_path != nullptr) opts.ontology_path = c_opts->ontology_path;
        opts.output_dir = c_opts->output_dir;
        if (c_opts->augs != nullptr) opts.augs = split_csv(c_opts->augs);
        opts.step = c_opts->step;
        opts.fallback = parse_fallback(c_opts->fallback);
        opts.colorize = c_opts->colorize != 0;
        opts.emit_soft = c_opts->emit_soft != 0;
        opts.allow_any_scale = c_opts->allow_any_scale != 0;
        opts.workers = c_opts->workers;

        ontoseg::RefineJobResult result = ontoseg::run_refine_job(opts);

        if (stats != nullptr) {
            stats->frames_total = result.frames_total;
            stats->frames_processed = result.frames_processed;
            stats->frames_incomplete = result.frames_incomplete;
            stats->frames_failed = result.frames_failed;
            stats->pixels_total = result.aggregate.pixels_total;
            stats->pixels_constrained = result.aggregate.pixels_constrained;
            stats->pixels_fallback = result.aggregate.pixels_fallback;
            stats->pixels_changed = result.aggregate.pixels_changed_by_mask;
            stats->renormalized_pixels = result.renormalized_pixels;
            stats->subsample_skipped = result.subsample_skipped_non_contiguous ? 1 : 0;
        }
        if (aggregate_json != nullptr) *aggregate_json = dup_string(result.aggregate_json);
        if (failure_lines != nullptr) {
            std::string lines;
            for (const ontoseg::FrameFailure& f : result.failures)
                lines += f.frame_id + ": " + f.message + "\n";
            *failure_lines = dup_string(lines);
        }
    });
}

ontoseg_status ontoseg_evaluate_dataset(const ontoseg_evaluate_options* c_opts, char** json,
                                        char** text_out) {
    return wrap([&] {
        require(c_opts != nullptr, "null argument");
        require(c_opts->pred_manifest_path != nullptr, "pred_manifest_path is required");
        require(c_opts->gt_manifest_path != nullptr, "gt_manifest_path is required");
        require(c_opts->taxonomy_path != nullptr, "taxonomy_path is required");
        require(c_opts->workers >= 1, "workers must be at least 1");

        ontoseg::EvaluateJobOptions opts;
        opts.pred_manifest_path = c_opts->pred_manifest_path;
        opts.gt_manifest_path = c_opts->gt_manifest_path;
        opts.taxonomy_path = c_opts->taxonomy_path;
        opts.workers = c_opts->workers;
        if (c_opts->baseline_json_path != nullptr) {
            std::ifstream in(c_opts->baseline_json_path, std::ios::binary);
            if (!in)
                throw ontoseg::io_error(std::string(c_opts->baseline_json_path) + ": cannot open");
            nlohmann::json doc;
            try {
                doc = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw ontoseg::parse_error(std::string(c_opts->baseline_json_path) + ": " +
                                           e.what());
            }
            if (!doc.contains("miou") || !doc["miou"].is_number())
                throw ontoseg::parse_error(std::string(c_opts->baseline_json_path) +
                                           ": report has no numeric 'miou' field");
            opts.baseline_miou = doc["miou"].get<double>();
        }

        ontoseg::EvaluateJobResult result = ontoseg::run_evaluate_job(opts);
        if (json != nullptr) *json = dup_string(result.json);
        if (text_out != nullptr) *text_out = dup_string(result.text);
    });
}

ontoseg_status ontoseg_simulate(const ontoseg_simulate_options* c_opts, char** report_json) {
    return wrap([&] {
        require(c_opts != nullptr, "null argument");
        require(c_opts->fine_taxonomy_path != nullptr, "fine_taxonomy_path is required");
        require(c_opts->coarse_taxonomy_path != nullptr, "coarse_taxonomy_path is required");
        require(c_opts->ontology_path != nullptr, "ontology_path is required");
        require(c_opts->trials >= 1, "trials must be at least 1");
        require(c_opts->confusion_count == 0 || c_opts->confusions != nullptr,
                "confusions is null but confusion_count is nonzero");

        ontoseg::Taxonomy fine = ontoseg::load_taxonomy(c_opts->fine_taxonomy_path);
        ontoseg::Taxonomy coarse = ontoseg::load_taxonomy(c_opts->coarse_taxonomy_path);
        ontoseg::OntologyRelation relation =
            ontoseg::load_ontology(c_opts->ontology_path, coarse, fine);

        ontoseg::SceneSpec spec;
        spec.height = c_opts->height;
        spec.width = c_opts->width;
        spec.num_cells = c_opts->num_cells;
        spec.seed = c_opts->seed;

        ontoseg::TeacherNoise noise;
        noise.sharpness = c_opts->sharpness;
        noise.sigma = c_opts->sigma;
        for (size_t i = 0; i < c_opts->confusion_count; ++i) {
            const char* entry = c_opts->confusions[i];
            require(entry != nullptr, "null confusion entry");
            auto parts = ontoseg::text::split_on(entry, ':');
            if (parts.size() != 3)
                throw ontoseg::argument_error(std::string("confusion '") + entry +
                                              "' is not from:to:strength");
            ontoseg::ConfusionPair pair;
            pair.from = resolve_class(fine, ontoseg::text::trim(parts[0]));
            pair.to = resolve_class(fine, ontoseg::text::trim(parts[1]));
            auto strength = ontoseg::text::parse_double(ontoseg::text::trim(parts[2]));
            if (!strength)
                throw ontoseg::argument_error(std::string("confusion '") + entry +
                                              "' has a malformed strength");
            pair.strength = *strength;
            noise.confusions.push_back(pair);
        }

        ontoseg::RefineConfig cfg;
        cfg.fallback = parse_fallback(c_opts->fallback);

        ontoseg::ExperimentResult result =
            ontoseg::run_experiment(spec, noise, fine, coarse, relation, cfg, c_opts->trials);
        if (c_opts->triptych_path != nullptr)
            ontoseg::write_triptych(result.last_fine, result.last_unconstrained,
                                    result.last_constrained, fine, c_opts->triptych_path);
        if (report_json != nullptr)
            *report_json = dup_string(ontoseg::experiment_report_to_json(result.report, fine));
    });
}

ontoseg_status ontoseg_stats(const char* const* inputs, size_t count, char** text_out,
                             char** json) {
    return wrap([&] {
        require(count == 0 || inputs != nullptr, "inputs is null but count is nonzero");
        std::vector<std::string> paths;
        for (size_t i = 0; i < count; ++i) {
            require(inputs[i] != nullptr, "null input path");
            paths.emplace_back(inputs[i]);
        }
        ontoseg::StatsJobResult result = ontoseg::run_stats_job(paths);
        if (text_out != nullptr) *text_out = dup_string(result.text);
        if (json != nullptr) *json = dup_string(result.json);
    });
}

}  // extern "C"
