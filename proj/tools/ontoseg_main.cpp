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

// Command-line front end. Talks to the toolkit exclusively through the C
// API so that the CLI doubles as a smoke test of the shared library.

#include "ontoseg/ontoseg.h"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

// Owns a string returned by the C API.
struct ApiString {
    char* value = nullptr;
    ~ApiString() { ontoseg_string_free(value); }
    const char* get() const { return value == nullptr ? "" : value; }
    bool empty() const { return value == nullptr || value[0] == '\0'; }
};

int default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

const char* opt(const std::string& s) { return s.empty() ? nullptr : s.c_str(); }

// Reports an API failure on stderr and picks the exit code: argument misuse
// is a usage error, everything else is a domain failure.
int report_failure(ontoseg_status status) {
    std::cerr << "error: " << ontoseg_last_error() << "\n";
    return status == ONTOSEG_ERR_ARGUMENT ? kExitUsage : kExitFailure;
}

bool write_text_file(const std::string& path, const char* data) {
    std::ofstream out(path, std::ios::binary);
    if (out) out << data;
    if (!out) {
        std::cerr << "error: " << path << ": cannot write\n";
        return false;
    }
    return true;
}

struct ValidateArgs {
    std::string extra, source, ontology;
    bool strict = false;
};

int run_validate(const ValidateArgs& args) {
    ApiString diagnostics;
    int errors = 0;
    int warnings = 0;
    ontoseg_status status = ontoseg_validate(args.extra.c_str(), args.source.c_str(),
                                             args.ontology.c_str(), &diagnostics.value, &errors,
                                             &warnings);
    if (status != ONTOSEG_OK) return report_failure(status);
    if (!diagnostics.empty()) std::cerr << diagnostics.get();
    std::cout << "validation: " << errors << " error" << (errors == 1 ? "" : "s") << ", "
              << warnings << " warning" << (warnings == 1 ? "" : "s") << "\n";
    if (errors > 0 || (args.strict && warnings > 0)) return kExitFailure;
    return kExitOk;
}

struct RefineArgs {
    std::string manifest, gt_root, predictions, gt_taxonomy, source_taxonomy, ontology;
    std::string output, augs, fallback = "void";
    int iteration = 0;
    int step = 0;
    bool colorize = false;
    bool emit_soft = false;
    bool allow_any_scale = false;
    bool keep_going = false;
    int workers = 1;
};

int run_refine(RefineArgs args) {
    std::string output_dir = args.output;
    if (args.iteration > 0) {
        std::filesystem::path root(args.output);
        std::filesystem::path it_dir = root / ("it" + std::to_string(args.iteration));
        output_dir = it_dir.string();
        if (args.predictions.empty()) args.predictions = (it_dir / "predictions").string();
    }
    if (args.predictions.empty()) {
        std::cerr << "error: --predictions is required unless --iteration names a workspace\n";
        return kExitUsage;
    }

    ontoseg_refine_options opts{};
    opts.manifest_path = args.manifest.c_str();
    opts.gt_root = opt(args.gt_root);
    opts.prediction_root = args.predictions.c_str();
    opts.gt_taxonomy_path = args.gt_taxonomy.c_str();
    opts.source_taxonomy_path = args.source_taxonomy.c_str();
    opts.ontology_path = opt(args.ontology);
    opts.output_dir = output_dir.c_str();
    opts.augs = opt(args.augs);
    opts.step = args.step;
    opts.fallback = args.fallback.c_str();
    opts.colorize = args.colorize ? 1 : 0;
    opts.emit_soft = args.emit_soft ? 1 : 0;
    opts.allow_any_scale = args.allow_any_scale ? 1 : 0;
    opts.workers = args.workers;

    ontoseg_refine_stats stats{};
    ApiString aggregate;
    ApiString failures;
    ontoseg_status status = ontoseg_refine_dataset(&opts, &stats, &aggregate.value,
                                                   &failures.value);
    if (status != ONTOSEG_OK) return report_failure(status);

    if (!failures.empty()) std::cerr << failures.get();
    std::cout << "frames: " << stats.frames_processed << " processed, " << stats.frames_incomplete
              << " incomplete, " << stats.frames_failed << " failed (of " << stats.frames_total
              << ")\n";
    if (stats.pixels_total > 0) {
        auto pct = [&](int64_t n) {
            return 100.0 * static_cast<double>(n) / static_cast<double>(stats.pixels_total);
        };
        std::printf("pixels: %.2f%% constrained, %.2f%% fallback, %.2f%% changed by masking\n",
                    pct(stats.pixels_constrained), pct(stats.pixels_fallback),
                    pct(stats.pixels_changed));
    }
    if (stats.renormalized_pixels > 0)
        std::cout << "renormalized " << stats.renormalized_pixels << " input pixels\n";
    if (stats.subsample_skipped != 0)
        std::cout << "note: manifest is not contiguous; subsampling step was ignored\n";
    std::cout << "wrote " << output_dir << "/pseudo-labels and " << output_dir << "/reports\n";

    int64_t bad = stats.frames_incomplete + stats.frames_failed;
    if (bad > 0 && !args.keep_going) return kExitFailure;
    return kExitOk;
}

struct EvaluateArgs {
    std::string predictions, ground_truth, taxonomy, baseline, json_path;
    int workers = 1;
};

int run_evaluate(const EvaluateArgs& args) {
    ontoseg_evaluate_options opts{};
    opts.pred_manifest_path = args.predictions.c_str();
    opts.gt_manifest_path = args.ground_truth.c_str();
    opts.taxonomy_path = args.taxonomy.c_str();
    opts.baseline_json_path = opt(args.baseline);
    opts.workers = args.workers;

    ApiString json;
    ApiString text;
    ontoseg_status status = ontoseg_evaluate_dataset(&opts, &json.value, &text.value);
    if (status != ONTOSEG_OK) return report_failure(status);
    if (!args.json_path.empty() && !write_text_file(args.json_path, json.get()))
        return kExitFailure;
    std::cout << text.get();
    return kExitOk;
}

struct SimulateArgs {
    std::string fine, coarse, ontology, fallback = "void";
    std::string triptych, report_path;
    int height = 64;
    int width = 64;
    int cells = 12;
    std::uint64_t seed = 0;
    int trials = 1;
    double sharpness = 2.0;
    double sigma = 0.0;
    std::vector<std::string> confusions;
};

int run_simulate(const SimulateArgs& args) {
    std::vector<const char*> confusions;
    confusions.reserve(args.confusions.size());
    for (const std::string& c : args.confusions) confusions.push_back(c.c_str());

    ontoseg_simulate_options opts{};
    opts.fine_taxonomy_path = args.fine.c_str();
    opts.coarse_taxonomy_path = args.coarse.c_str();
    opts.ontology_path = args.ontology.c_str();
    opts.height = args.height;
    opts.width = args.width;
    opts.num_cells = args.cells;
    opts.seed = args.seed;
    opts.trials = args.trials;
    opts.sharpness = args.sharpness;
    opts.sigma = args.sigma;
    opts.confusions = confusions.empty() ? nullptr : confusions.data();
    opts.confusion_count = confusions.size();
    opts.fallback = args.fallback.c_str();
    opts.triptych_path = opt(args.triptych);

    ApiString report;
    ontoseg_status status = ontoseg_simulate(&opts, &report.value);
    if (status != ONTOSEG_OK) return report_failure(status);
    if (args.report_path.empty()) {
        std::cout << report.get();
    } else {
        if (!write_text_file(args.report_path, report.get())) return kExitFailure;
        std::cout << "wrote " << args.report_path << "\n";
    }
    return kExitOk;
}

struct StatsArgs {
    std::vector<std::string> inputs;
    std::string json_path;
};

int run_stats(const StatsArgs& args) {
    std::vector<const char*> inputs;
    inputs.reserve(args.inputs.size());
    for (const std::string& p : args.inputs) inputs.push_back(p.c_str());

    ApiString text;
    ApiString json;
    ontoseg_status status = ontoseg_stats(inputs.empty() ? nullptr : inputs.data(), inputs.size(),
                                          &text.value, &json.value);
    if (status != ONTOSEG_OK) return report_failure(status);
    if (!args.json_path.empty() && !write_text_file(args.json_path, json.get()))
        return kExitFailure;
    std::cout << text.get();
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Taxonomy-constrained pseudo-label toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("ontoseg ") + ontoseg_version());

    bool verbose = false;
    app.add_flag("--verbose", verbose, "Extra progress output on stderr");

    ValidateArgs val;
    CLI::App* validate = app.add_subcommand("validate", "Check an ontology against two taxonomies");
    validate->add_option("--extra", val.extra, "Extra (ground truth) taxonomy file")
        ->required();
    validate->add_option("--source", val.source, "Source (output) taxonomy file")->required();
    validate->add_option("--ontology", val.ontology, "Ontology mapping file")->required();
    validate->add_flag("--strict", val.strict, "Treat warnings as failures");

    RefineArgs ref;
    ref.workers = default_workers();
    CLI::App* refine =
        app.add_subcommand("refine", "Constrain soft predictions into pseudo-label PNGs");
    refine->add_option("--manifest", ref.manifest, "Dataset manifest")->required();
    refine->add_option("--gt-root", ref.gt_root,
                       "Root for relative ground truth paths (default: manifest directory)");
    refine->add_option("--predictions", ref.predictions,
                       "Prediction root, layout <root>/<frame-id>/<aug>.sftp");
    refine->add_option("--gt-taxonomy", ref.gt_taxonomy, "Ground truth taxonomy file")
        ->required();
    refine->add_option("--source-taxonomy", ref.source_taxonomy, "Output taxonomy file")
        ->required();
    refine->add_option("--ontology", ref.ontology,
                       "Ontology mapping file (default: the manifest's declaration)");
    refine->add_option("--output", ref.output, "Output root directory")->required();
    refine
        ->add_option("--iteration", ref.iteration,
                     "Distillation round; works inside <output>/it<i>/")
        ->check(CLI::PositiveNumber);
    refine->add_option("--augs", ref.augs, "Comma-separated augmentation names (default: all 14)");
    refine->add_option("--step", ref.step, "Keep every k-th frame (default: manifest step)")
        ->check(CLI::NonNegativeNumber);
    refine->add_option("--fallback", ref.fallback, "Policy for contradicted pixels")
        ->check(CLI::IsMember({"error", "void", "unconstrained"}));
    refine->add_flag("--colorize", ref.colorize, "Also write RGB previews");
    refine->add_flag("--emit-soft", ref.emit_soft, "Also write masked soft tensors");
    refine->add_flag("--allow-any-scale", ref.allow_any_scale,
                     "Accept tensors with non-standard scales");
    refine->add_flag("--keep-going", ref.keep_going, "Exit 0 even when frames fail");
    refine->add_option("--workers", ref.workers, "Worker threads")->check(CLI::PositiveNumber);

    EvaluateArgs ev;
    ev.workers = default_workers();
    CLI::App* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
    evaluate->add_option("--predictions", ev.predictions, "Prediction manifest")->required();
    evaluate->add_option("--ground-truth", ev.ground_truth, "Ground truth manifest")->required();
    evaluate->add_option("--taxonomy", ev.taxonomy, "Taxonomy both manifests label in")
        ->required();
    evaluate->add_option("--baseline", ev.baseline, "Earlier JSON report for the diff column");
    evaluate->add_option("--json", ev.json_path, "Write the JSON report here");
    evaluate->add_option("--workers", ev.workers, "Worker threads")->check(CLI::PositiveNumber);

    SimulateArgs sim;
    CLI::App* simulate =
        app.add_subcommand("simulate", "Synthetic scenes demonstrating constrained refinement");
    simulate->add_option("--fine", sim.fine, "Fine taxonomy file")->required();
    simulate->add_option("--coarse", sim.coarse, "Coarse taxonomy file")->required();
    simulate->add_option("--ontology", sim.ontology, "Coarse to fine ontology file")->required();
    simulate->add_option("--height", sim.height, "Scene height")->check(CLI::PositiveNumber);
    simulate->add_option("--width", sim.width, "Scene width")->check(CLI::PositiveNumber);
    simulate->add_option("--cells", sim.cells, "Voronoi cells per scene")
        ->check(CLI::PositiveNumber);
    simulate->add_option("--seed", sim.seed, "Base seed (trial i uses seed + i)")->required();
    simulate->add_option("--trials", sim.trials, "Number of trials")->check(CLI::PositiveNumber);
    simulate->add_option("--sharpness", sim.sharpness, "Teacher logit for the true class");
    simulate->add_option("--sigma", sim.sigma, "Per-logit gaussian noise scale")
        ->check(CLI::NonNegativeNumber);
    simulate->add_option("--confuse", sim.confusions,
                         "Teacher confusion from:to:strength (repeatable)");
    simulate->add_option("--fallback", sim.fallback, "Policy for contradicted pixels")
        ->check(CLI::IsMember({"error", "void", "unconstrained"}));
    simulate->add_option("--triptych", sim.triptych,
                         "Write truth / unconstrained / constrained panels here");
    simulate->add_option("--report", sim.report_path,
                         "Write the JSON report here instead of stdout");

    StatsArgs st;
    CLI::App* stats = app.add_subcommand("stats", "Frame count tables for manifest collections");
    stats->add_option("inputs", st.inputs, ".manifest and .manifestset files");
    stats->add_option("--json", st.json_path, "Write the JSON table here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (verbose) std::cerr << "ontoseg " << ontoseg_version() << "\n";

    if (validate->parsed()) return run_validate(val);
    if (refine->parsed()) return run_refine(ref);
    if (evaluate->parsed()) return run_evaluate(ev);
    if (simulate->parsed()) return run_simulate(sim);
    if (stats->parsed()) return run_stats(st);
    return kExitUsage;
}
