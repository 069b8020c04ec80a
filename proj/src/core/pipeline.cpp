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

#include "core/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>

#include "core/error.hpp"
#include "core/ontology.hpp"
#include "core/tensor.hpp"
#include "core/text.hpp"
#include "core/worker_pool.hpp"

namespace ontoseg {
namespace {

namespace fs = std::filesystem;

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error(path.string() + ": cannot open");
    out << content;
    if (!out) throw io_error(path.string() + ": write failed");
}

fs::path resolve(const fs::path& base, const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base / path;
}

void check_taxonomy_name(const Taxonomy& tax, const std::string& declared,
                         const std::string& context) {
    if (text::fold_name(tax.name()) != text::fold_name(declared))
        throw validation_error(context + " declares taxonomy '" + declared +
                               "' but the loaded taxonomy is named '" + tax.name() + "'");
}

nlohmann::json report_to_json(const RefineReport& r) {
    nlohmann::json doc;
    doc["pixels_total"] = r.pixels_total;
    doc["pixels_constrained"] = r.pixels_constrained;
    doc["pixels_fallback"] = r.pixels_fallback;
    doc["pixels_changed_by_mask"] = r.pixels_changed_by_mask;
    doc["void_pixels"] = r.void_pixels;
    doc["class_histogram"] = r.class_histogram;
    nlohmann::json examples = nlohmann::json::array();
    for (const auto& [y, x] : r.fallback_examples) examples.push_back({y, x});
    doc["fallback_examples"] = std::move(examples);
    return doc;
}

struct FrameOutcome {
    bool attempted = false;
    bool ok = false;
    std::string error;
    RefineReport report;
    std::int64_t renormalized_pixels = 0;
};

}  // namespace

RefineJobResult run_refine_job(const RefineJobOptions& opts) {
    DatasetManifest manifest = load_manifest(opts.manifest_path);
    const fs::path manifest_dir = fs::path(opts.manifest_path).parent_path();
    const fs::path gt_root = opts.gt_root.empty() ? manifest_dir : fs::path(opts.gt_root);

    Taxonomy extra = load_taxonomy(opts.gt_taxonomy_path);
    Taxonomy source = load_taxonomy(opts.source_taxonomy_path);
    check_taxonomy_name(extra, manifest.taxonomy_name, "manifest");

    std::string ontology_path = opts.ontology_path;
    if (ontology_path.empty()) {
        if (manifest.ontology_path.empty())
            throw validation_error(opts.manifest_path +
                                   ": manifest declares no ontology and none was given");
        ontology_path = resolve(manifest_dir, manifest.ontology_path).string();
    }
    OntologyRelation relation = load_ontology(ontology_path, extra, source);
    Diagnostics diags = validate_ontology(relation, extra, source);
    if (error_count(diags) > 0)
        throw validation_error(ontology_path + ": ontology failed validation\n" +
                               format_diagnostics(diags));
    ConstraintTable table = build_constraint_table(relation, extra, source);

    RefineJobResult result;
    int step = opts.step > 0 ? opts.step : manifest.sampling_step;
    SubsampleResult sub = subsample(manifest, step);
    result.subsample_skipped_non_contiguous = sub.skipped_non_contiguous;

    const std::vector<std::string>& augs = opts.augs.empty() ? standard_aug_names() : opts.augs;
    PairingReport pairing = pair_frames(sub.manifest, opts.prediction_root, augs);
    result.frames_total = static_cast<std::int64_t>(sub.manifest.frames.size());

    const fs::path out_dir(opts.output_dir);
    const fs::path labels_dir = out_dir / "pseudo-labels";
    const fs::path reports_dir = out_dir / "reports";
    const fs::path soft_dir = out_dir / "soft";
    fs::create_directories(labels_dir);
    fs::create_directories(reports_dir);
    if (opts.emit_soft) fs::create_directories(soft_dir);
    // Parent directories for nested frame ids, created before workers start.
    for (const PairedFrame& pf : pairing.complete) {
        fs::create_directories((labels_dir / (pf.frame.id + ".png")).parent_path());
        fs::create_directories((reports_dir / (pf.frame.id + ".json")).parent_path());
        if (opts.emit_soft)
            fs::create_directories((soft_dir / (pf.frame.id + ".sftp")).parent_path());
    }

    RefineConfig cfg;
    cfg.fallback = opts.fallback;
    cfg.renormalize_output = false;

    std::vector<FrameOutcome> outcomes(pairing.complete.size());
    parallel_for(pairing.complete.size(), opts.workers, [&](std::size_t i) {
        const PairedFrame& pf = pairing.complete[i];
        FrameOutcome& out = outcomes[i];
        out.attempted = true;
        try {
            LabelMap gt = read_labelmap(resolve(gt_root, pf.frame.gt_path).string(), extra);
            std::vector<AugPrediction> augs_loaded;
            augs_loaded.reserve(pf.prediction_paths.size());
            for (const std::string& path : pf.prediction_paths) {
                SoftReadResult r = read_soft(path, opts.allow_any_scale);
                out.renormalized_pixels += r.renormalized_pixels;
                augs_loaded.push_back({std::move(r.pred), r.desc});
            }
            RefineResult refined = refine_image(augs_loaded, gt, table, cfg);

            write_labelmap((labels_dir / (pf.frame.id + ".png")).string(), refined.labels);
            if (opts.colorize)
                write_colorized(refined.labels, source,
                                (labels_dir / (pf.frame.id + "_color.png")).string());
            if (opts.emit_soft) {
                SoftPrediction soft = std::move(refined.masked);
                const int c = soft.channels;
                const float uniform = static_cast<float>(1.0 / c);
                for (std::size_t p = 0; p < soft.pixel_count(); ++p) {
                    float* px = soft.scores.data() + p * c;
                    double sum = 0.0;
                    for (int k = 0; k < c; ++k) sum += px[k];
                    if (sum == 0.0)
                        for (int k = 0; k < c; ++k) px[k] = uniform;
                    else
                        for (int k = 0; k < c; ++k)
                            px[k] = static_cast<float>(static_cast<double>(px[k]) / sum);
                }
                AugDescriptor identity;
                identity.base_height = soft.height;
                identity.base_width = soft.width;
                write_soft(soft, identity, (soft_dir / (pf.frame.id + ".sftp")).string());
            }

            nlohmann::json doc = report_to_json(refined.report);
            doc["schema"] = 1;
            doc["frame"] = pf.frame.id;
            doc["renormalized_pixels"] = out.renormalized_pixels;
            write_text_file(reports_dir / (pf.frame.id + ".json"), doc.dump(2) + "\n");

            out.report = std::move(refined.report);
            out.ok = true;
        } catch (const Error& e) {
            out.error = e.what();
        }
    });

    for (const PairingReport::Incomplete& inc : pairing.incomplete) {
        std::string msg = "incomplete: missing ";
        for (std::size_t i = 0; i < inc.missing.size(); ++i) {
            if (i > 0) msg += ", ";
            msg += inc.missing[i];
        }
        result.failures.push_back({inc.frame_id, msg});
        ++result.frames_incomplete;
    }
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const FrameOutcome& out = outcomes[i];
        if (out.ok) {
            result.aggregate.merge(out.report);
            result.renormalized_pixels += out.renormalized_pixels;
            ++result.frames_processed;
        } else {
            result.failures.push_back({pairing.complete[i].frame.id, out.error});
            ++result.frames_failed;
        }
    }

    nlohmann::json agg = report_to_json(result.aggregate);
    agg["schema"] = 1;
    agg["dataset"] = manifest.name;
    agg["frames_total"] = result.frames_total;
    agg["frames_processed"] = result.frames_processed;
    agg["frames_incomplete"] = result.frames_incomplete;
    agg["frames_failed"] = result.frames_failed;
    nlohmann::json failures = nlohmann::json::array();
    for (const FrameFailure& f : result.failures)
        failures.push_back({{"frame", f.frame_id}, {"message", f.message}});
    agg["failures"] = std::move(failures);
    const double total = result.aggregate.pixels_total > 0
                             ? static_cast<double>(result.aggregate.pixels_total)
                             : 1.0;
    agg["fraction_constrained"] = round6(result.aggregate.pixels_constrained / total);
    agg["fraction_fallback"] = round6(result.aggregate.pixels_fallback / total);
    agg["fraction_changed"] = round6(result.aggregate.pixels_changed_by_mask / total);
    nlohmann::json histogram = nlohmann::json::array();
    for (std::size_t id = 0; id < result.aggregate.class_histogram.size(); ++id)
        histogram.push_back({{"id", id},
                             {"name", source.class_at(static_cast<int>(id)).name},
                             {"count", result.aggregate.class_histogram[id]}});
    agg["class_histogram"] = std::move(histogram);
    agg["void_pixels"] = result.aggregate.void_pixels;
    agg["renormalized_pixels"] = result.renormalized_pixels;
    agg["subsample_skipped_non_contiguous"] = result.subsample_skipped_non_contiguous;
    result.aggregate_json = agg.dump(2) + "\n";
    write_text_file(reports_dir / "aggregate.json", result.aggregate_json);

    // Manifest of the produced labels, ready to feed into evaluate.
    DatasetManifest produced;
    produced.name = manifest.name + "-pseudo";
    produced.taxonomy_name = source.name();
    for (std::size_t i = 0; i < outcomes.size(); ++i)
        if (outcomes[i].ok) {
            FrameEntry f;
            f.id = pairing.complete[i].frame.id;
            f.gt_path = "pseudo-labels/" + f.id + ".png";
            produced.frames.push_back(std::move(f));
        }
    write_text_file(out_dir / "pseudo-labels.manifest", serialize_manifest(produced));
    return result;
}

EvaluateJobResult run_evaluate_job(const EvaluateJobOptions& opts) {
    DatasetManifest pred_manifest = load_manifest(opts.pred_manifest_path);
    DatasetManifest gt_manifest = load_manifest(opts.gt_manifest_path);
    Taxonomy taxonomy = load_taxonomy(opts.taxonomy_path);
    check_taxonomy_name(taxonomy, pred_manifest.taxonomy_name, "prediction manifest");
    check_taxonomy_name(taxonomy, gt_manifest.taxonomy_name, "ground-truth manifest");

    if (pred_manifest.frames.size() != gt_manifest.frames.size())
        throw validation_error("manifest length mismatch: " +
                               std::to_string(pred_manifest.frames.size()) + " predictions vs " +
                               std::to_string(gt_manifest.frames.size()) + " ground truths");
    for (std::size_t i = 0; i < pred_manifest.frames.size(); ++i)
        if (pred_manifest.frames[i].id != gt_manifest.frames[i].id)
            throw validation_error("frame id mismatch at index " + std::to_string(i) + ": '" +
                                   pred_manifest.frames[i].id + "' vs '" +
                                   gt_manifest.frames[i].id + "'");

    const fs::path pred_dir = fs::path(opts.pred_manifest_path).parent_path();
    const fs::path gt_dir = fs::path(opts.gt_manifest_path).parent_path();

    std::vector<ConfusionMatrix> shards(pred_manifest.frames.size(),
                                        ConfusionMatrix(taxonomy.class_count()));
    parallel_for(pred_manifest.frames.size(), opts.workers, [&](std::size_t i) {
        LabelMap pred =
            read_labelmap(resolve(pred_dir, pred_manifest.frames[i].gt_path).string(), taxonomy);
        LabelMap gt =
            read_labelmap(resolve(gt_dir, gt_manifest.frames[i].gt_path).string(), taxonomy);
        shards[i].accumulate(pred, gt);
    });

    ConfusionMatrix cm(taxonomy.class_count());
    for (const ConfusionMatrix& shard : shards) cm.merge(shard);

    EvaluateJobResult result;
    result.report = summarize(cm, taxonomy);
    result.json = eval_report_to_json(result.report);
    result.text = eval_report_to_text(result.report, opts.baseline_miou);
    return result;
}

StatsJobResult run_stats_job(const std::vector<std::string>& inputs) {
    StatsJobResult result;
    StatsSet pending;
    bool have_pending = false;
    auto flush = [&] {
        if (have_pending) {
            result.sets.push_back(std::move(pending));
            pending = StatsSet{};
            have_pending = false;
        }
    };
    for (const std::string& input : inputs) {
        if (input.size() >= 12 && input.compare(input.size() - 12, 12, ".manifestset") == 0) {
            flush();
            result.sets.push_back(load_manifestset(input));
        } else {
            pending.entries.push_back(stats_entry_from_manifest(load_manifest(input)));
            have_pending = true;
        }
    }
    flush();
    result.text = stats_to_text(result.sets);
    result.json = stats_to_json(result.sets);
    return result;
}

}  // namespace ontoseg
