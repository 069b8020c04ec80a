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

#include "core/simulate.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <limits>

#include "core/error.hpp"
#include "core/png_io.hpp"
#include "core/rng.hpp"

namespace ontoseg {
namespace {

void check_noise(const TeacherNoise& noise, int class_count) {
    if (!std::isfinite(noise.sharpness) || noise.sharpness < 0.0)
        throw argument_error("teacher sharpness must be finite and non-negative");
    if (!std::isfinite(noise.sigma) || noise.sigma < 0.0)
        throw argument_error("teacher sigma must be finite and non-negative");
    for (const ConfusionPair& p : noise.confusions) {
        if (p.from < 0 || p.from >= class_count || p.to < 0 || p.to >= class_count)
            throw argument_error("confusion pair (" + std::to_string(p.from) + "," +
                                 std::to_string(p.to) + ") outside the class range");
        if (!std::isfinite(p.strength) || p.strength < 0.0)
            throw argument_error("confusion strength must be finite and non-negative");
    }
}

/// Effective fine -> coarse lookup; errors unless the rows partition the
/// fine classes.
std::vector<int> partition_lookup(const OntologyRelation& rel) {
    std::vector<int> owner(rel.source_class_count, -1);
    for (int e = 0; e < rel.extra_class_count; ++e) {
        if (rel.entries[e].none()) continue;
        ClassSet row = rel.entries[e];
        row -= rel.excluded_source;
        for (int f : row.to_ids()) {
            if (owner[f] != -1)
                throw validation_error("source class " + std::to_string(f) +
                                       " appears under extra classes " + std::to_string(owner[f]) +
                                       " and " + std::to_string(e) +
                                       "; coarsening needs a partition");
            owner[f] = e;
        }
    }
    for (int f = 0; f < rel.source_class_count; ++f)
        if (owner[f] == -1)
            throw validation_error("source class " + std::to_string(f) +
                                   " appears in no allowed set; coarsening needs a partition");
    return owner;
}

}  // namespace

LabelMap generate_scene(const SceneSpec& spec, const Taxonomy& fine) {
    if (spec.height < 8 || spec.width < 8)
        throw argument_error("scene dimensions must be at least 8x8");
    if (spec.num_cells < 1) throw argument_error("scene needs at least one cell");

    std::vector<int> classes;
    for (const ClassDef& c : fine.classes())
        if (!c.is_void) classes.push_back(c.id);
    if (classes.empty()) throw argument_error("taxonomy has no non-void classes");

    SplitMix64 rng(spec.seed);
    struct Seed {
        int y, x, klass;
    };
    std::vector<Seed> seeds(spec.num_cells);
    for (Seed& s : seeds) {
        s.y = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(spec.height)));
        s.x = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(spec.width)));
        s.klass = classes[rng.next_below(classes.size())];
    }

    LabelMap map;
    map.height = spec.height;
    map.width = spec.width;
    map.ids.resize(map.pixel_count());
    for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
            std::int64_t best = std::numeric_limits<std::int64_t>::max();
            int best_class = 0;
            for (const Seed& s : seeds) {
                std::int64_t dy = y - s.y;
                std::int64_t dx = x - s.x;
                std::int64_t d = dy * dy + dx * dx;
                if (d < best) {
                    best = d;
                    best_class = s.klass;
                }
            }
            map.at(y, x) = static_cast<std::uint8_t>(best_class);
        }
    }
    return map;
}

LabelMap coarsen(const LabelMap& fine_map, const OntologyRelation& rel) {
    std::vector<int> owner = partition_lookup(rel);
    LabelMap out;
    out.height = fine_map.height;
    out.width = fine_map.width;
    out.ids.resize(fine_map.pixel_count());
    for (std::size_t i = 0; i < fine_map.ids.size(); ++i) {
        std::uint8_t f = fine_map.ids[i];
        if (f == kVoidLabel) {
            out.ids[i] = kVoidLabel;
            continue;
        }
        if (f >= owner.size())
            throw argument_error("fine label " + std::to_string(f) +
                                 " outside the relation's source classes");
        out.ids[i] = static_cast<std::uint8_t>(owner[f]);
    }
    return out;
}

SoftPrediction simulate_teacher(const LabelMap& fine_map, const TeacherNoise& noise,
                                int class_count) {
    if (class_count < 2 || class_count > 255)
        throw argument_error("teacher needs 2..255 classes");
    check_noise(noise, class_count);

    SoftPrediction pred;
    pred.height = fine_map.height;
    pred.width = fine_map.width;
    pred.channels = class_count;
    pred.scores.resize(fine_map.pixel_count() * class_count);

    SplitMix64 rng(noise.seed);
    std::vector<double> logits(class_count);
    std::vector<double> exps(class_count);
    for (std::size_t p = 0; p < fine_map.ids.size(); ++p) {
        std::uint8_t truth = fine_map.ids[p];
        if (truth != kVoidLabel && truth >= class_count)
            throw argument_error("fine label " + std::to_string(truth) +
                                 " outside the class range");
        for (int c = 0; c < class_count; ++c) logits[c] = 0.0;
        if (truth != kVoidLabel) {
            logits[truth] += noise.sharpness;
            for (const ConfusionPair& cp : noise.confusions)
                if (truth == cp.from) logits[cp.to] += cp.strength;
        }
        if (noise.sigma > 0.0)
            for (int c = 0; c < class_count; ++c) logits[c] += noise.sigma * rng.next_gaussian();

        double m = logits[0];
        for (int c = 1; c < class_count; ++c) m = std::max(m, logits[c]);
        double sum = 0.0;
        for (int c = 0; c < class_count; ++c) {
            exps[c] = std::exp(logits[c] - m);
            sum += exps[c];
        }
        float* dst = pred.scores.data() + p * class_count;
        for (int c = 0; c < class_count; ++c) dst[c] = static_cast<float>(exps[c] / sum);
    }
    return pred;
}

ExperimentResult run_experiment(const SceneSpec& spec, const TeacherNoise& noise,
                                const Taxonomy& fine, const Taxonomy& coarse,
                                const OntologyRelation& rel, const RefineConfig& cfg, int trials) {
    if (trials < 1) throw argument_error("experiment needs at least one trial");
    if (rel.source_class_count != fine.class_count() ||
        rel.extra_class_count != coarse.class_count())
        throw argument_error("relation does not match the given taxonomies");
    check_noise(noise, fine.class_count());
    partition_lookup(rel);  // fail fast before any trial runs

    ConstraintTable table = build_constraint_table(rel, coarse, fine);

    ExperimentResult res;
    ExperimentReport& rep = res.report;
    rep.spec = spec;
    rep.noise = noise;
    rep.trials = trials;

    std::vector<bool> confusion_source(fine.class_count(), false);
    for (const ConfusionPair& p : noise.confusions) confusion_source[p.from] = true;

    ConfusionMatrix cm_unconstrained(fine.class_count());
    ConfusionMatrix cm_constrained(fine.class_count());
    double acc_u_sum = 0.0, acc_c_sum = 0.0;

    for (int t = 0; t < trials; ++t) {
        TrialResult trial;
        trial.trial_seed = spec.seed + static_cast<std::uint64_t>(t);

        SceneSpec scene_spec = spec;
        scene_spec.seed = derive_seed(trial.trial_seed, 0);
        TeacherNoise teacher = noise;
        teacher.seed = derive_seed(trial.trial_seed, 1);

        LabelMap fine_truth = generate_scene(scene_spec, fine);
        LabelMap coarse_gt = coarsen(fine_truth, rel);
        SoftPrediction soft = simulate_teacher(fine_truth, teacher, fine.class_count());

        LabelMap unconstrained = harden(soft, {}, cfg);

        AugDescriptor identity;
        identity.base_height = fine_truth.height;
        identity.base_width = fine_truth.width;
        std::vector<AugPrediction> augs;
        augs.push_back({std::move(soft), identity});
        RefineResult refined = refine_image(augs, coarse_gt, table, cfg);

        const std::int64_t total = static_cast<std::int64_t>(fine_truth.pixel_count());
        std::int64_t correct_u = 0, correct_c = 0;
        for (std::size_t i = 0; i < fine_truth.ids.size(); ++i) {
            std::uint8_t truth = fine_truth.ids[i];
            bool ok_u = unconstrained.ids[i] == truth;
            bool ok_c = refined.labels.ids[i] == truth;
            correct_u += ok_u;
            correct_c += ok_c;
            trial.fixed_by_constraint += (!ok_u && ok_c);
            trial.introduced_by_constraint += (ok_u && !ok_c);
            if (truth != kVoidLabel && confusion_source[truth]) {
                ++trial.confused_pixels;
                trial.confused_correct_unconstrained += ok_u;
                trial.confused_correct_constrained += ok_c;
            }
        }
        trial.accuracy_unconstrained = static_cast<double>(correct_u) / total;
        trial.accuracy_constrained = static_cast<double>(correct_c) / total;

        cm_unconstrained.accumulate(unconstrained, fine_truth);
        cm_constrained.accumulate(refined.labels, fine_truth);
        acc_u_sum += trial.accuracy_unconstrained;
        acc_c_sum += trial.accuracy_constrained;
        rep.total_fixed += trial.fixed_by_constraint;
        rep.total_introduced += trial.introduced_by_constraint;
        rep.confused_pixels += trial.confused_pixels;
        rep.confused_correct_unconstrained += trial.confused_correct_unconstrained;
        rep.confused_correct_constrained += trial.confused_correct_constrained;
        rep.per_trial.push_back(trial);

        if (t == trials - 1) {
            res.last_fine = std::move(fine_truth);
            res.last_unconstrained = std::move(unconstrained);
            res.last_constrained = std::move(refined.labels);
        }
    }

    rep.mean_accuracy_unconstrained = acc_u_sum / trials;
    rep.mean_accuracy_constrained = acc_c_sum / trials;
    rep.eval_unconstrained = summarize(cm_unconstrained, fine);
    rep.eval_constrained = summarize(cm_constrained, fine);
    return res;
}

std::string experiment_report_to_json(const ExperimentReport& report, const Taxonomy& fine) {
    nlohmann::json doc;
    doc["schema"] = 1;
    doc["scene"] = {{"height", report.spec.height},
                    {"width", report.spec.width},
                    {"num_cells", report.spec.num_cells}};
    doc["seed"] = report.spec.seed;
    doc["trials"] = report.trials;
    doc["teacher"] = {{"sharpness", report.noise.sharpness}, {"sigma", report.noise.sigma}};
    nlohmann::json pairs = nlohmann::json::array();
    for (const ConfusionPair& p : report.noise.confusions)
        pairs.push_back({{"from", fine.class_at(p.from).name},
                         {"to", fine.class_at(p.to).name},
                         {"strength", p.strength}});
    doc["teacher"]["confusions"] = std::move(pairs);

    nlohmann::json trials = nlohmann::json::array();
    for (const TrialResult& t : report.per_trial) {
        nlohmann::json entry;
        entry["seed"] = t.trial_seed;
        entry["accuracy_unconstrained"] = t.accuracy_unconstrained;
        entry["accuracy_constrained"] = t.accuracy_constrained;
        entry["fixed_by_constraint"] = t.fixed_by_constraint;
        entry["introduced_by_constraint"] = t.introduced_by_constraint;
        entry["confused_pixels"] = t.confused_pixels;
        entry["confused_correct_unconstrained"] = t.confused_correct_unconstrained;
        entry["confused_correct_constrained"] = t.confused_correct_constrained;
        trials.push_back(std::move(entry));
    }
    doc["per_trial"] = std::move(trials);

    doc["mean_accuracy_unconstrained"] = report.mean_accuracy_unconstrained;
    doc["mean_accuracy_constrained"] = report.mean_accuracy_constrained;
    doc["total_fixed"] = report.total_fixed;
    doc["total_introduced"] = report.total_introduced;
    doc["confused_pixels"] = report.confused_pixels;
    doc["confused_correct_unconstrained"] = report.confused_correct_unconstrained;
    doc["confused_correct_constrained"] = report.confused_correct_constrained;

    auto eval_json = [&](const EvalReport& er) {
        nlohmann::json e;
        nlohmann::json classes = nlohmann::json::array();
        for (const ClassIou& c : er.per_class) {
            nlohmann::json entry;
            entry["id"] = c.id;
            entry["name"] = c.name;
            if (c.iou)
                entry["iou"] = round6(*c.iou);
            else
                entry["iou"] = nullptr;
            classes.push_back(std::move(entry));
        }
        e["classes"] = std::move(classes);
        e["miou"] = round6(er.miou);
        e["classes_included"] = er.classes_included;
        return e;
    };
    doc["eval_unconstrained"] = eval_json(report.eval_unconstrained);
    doc["eval_constrained"] = eval_json(report.eval_constrained);
    return doc.dump(2) + "\n";
}

void write_triptych(const LabelMap& fine_map, const LabelMap& unconstrained,
                    const LabelMap& constrained, const Taxonomy& fine, const std::string& path) {
    const LabelMap* panels[3] = {&fine_map, &unconstrained, &constrained};
    for (const LabelMap* p : panels)
        if (p->height != fine_map.height || p->width != fine_map.width)
            throw argument_error("triptych panels must share dimensions");
    const int gap = 4;
    png_io::Rgb8 img;
    img.height = fine_map.height;
    img.width = fine_map.width * 3 + gap * 2;
    img.pixels.assign(static_cast<std::size_t>(img.height) * img.width * 3, 255);
    const int klass_count = fine.class_count();
    for (int panel = 0; panel < 3; ++panel) {
        const LabelMap& map = *panels[panel];
        const int x_off = panel * (fine_map.width + gap);
        for (int y = 0; y < map.height; ++y) {
            for (int x = 0; x < map.width; ++x) {
                std::uint8_t id = map.at(y, x);
                Rgb color{0, 0, 0};
                if (id != kVoidLabel) {
                    if (id >= klass_count)
                        throw argument_error("triptych label outside taxonomy");
                    color = fine.class_at(id).color;
                }
                std::size_t base = (static_cast<std::size_t>(y) * img.width + x_off + x) * 3;
                img.pixels[base] = color.r;
                img.pixels[base + 1] = color.g;
                img.pixels[base + 2] = color.b;
            }
        }
    }
    png_io::write_rgb8(path, img);
}

}  // namespace ontoseg
