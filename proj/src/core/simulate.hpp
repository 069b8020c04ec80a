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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "core/metrics.hpp"
#include "core/ontology.hpp"
#include "core/refine.hpp"
#include "core/taxonomy.hpp"
#include "core/tensor.hpp"

namespace ontoseg {

struct SceneSpec {
    int height = 64;
    int width = 64;
    int num_cells = 12;
    std::uint64_t seed = 0;
};

struct ConfusionPair {
    int from = 0;
    int to = 0;
    double strength = 0.0;  // logit added to `to` wherever the truth is `from`
};

struct TeacherNoise {
    double sharpness = 2.0;  // logit weight on the true class
    std::vector<ConfusionPair> confusions;
    double sigma = 0.0;  // per-logit Gaussian scale; 0 draws nothing
    std::uint64_t seed = 0;
};

/// Voronoi scene: seeds placed uniformly at random, each with a uniformly
/// drawn non-void class; every pixel takes the class of its nearest seed
/// (squared Euclidean distance, ties to the lowest seed index).
LabelMap generate_scene(const SceneSpec& spec, const Taxonomy& fine);

/// Projects a fine label map into the extra taxonomy. The relation restricted
/// to the effective allowed sets (entries minus exclusions) must be a
/// partition of the fine classes; void passes through.
LabelMap coarsen(const LabelMap& fine_map, const OntologyRelation& rel);

/// Softmax over per-pixel logits: sharpness on the true class, confusion
/// strengths on their targets, optional Gaussian corruption. Draws are
/// consumed pixel by pixel in row-major order, channels ascending.
SoftPrediction simulate_teacher(const LabelMap& fine_map, const TeacherNoise& noise,
                                int class_count);

struct TrialResult {
    std::uint64_t trial_seed = 0;
    double accuracy_unconstrained = 0.0;
    double accuracy_constrained = 0.0;
    std::int64_t fixed_by_constraint = 0;
    std::int64_t introduced_by_constraint = 0;
    std::int64_t confused_pixels = 0;
    std::int64_t confused_correct_unconstrained = 0;
    std::int64_t confused_correct_constrained = 0;
};

struct ExperimentReport {
    SceneSpec spec;
    TeacherNoise noise;
    int trials = 0;
    std::vector<TrialResult> per_trial;
    double mean_accuracy_unconstrained = 0.0;
    double mean_accuracy_constrained = 0.0;
    std::int64_t total_fixed = 0;
    std::int64_t total_introduced = 0;
    std::int64_t confused_pixels = 0;
    std::int64_t confused_correct_unconstrained = 0;
    std::int64_t confused_correct_constrained = 0;
    EvalReport eval_unconstrained;
    EvalReport eval_constrained;
};

struct ExperimentResult {
    ExperimentReport report;
    /// Maps of the last trial, kept for the optional triptych rendering.
    LabelMap last_fine;
    LabelMap last_unconstrained;
    LabelMap last_constrained;
};

/// Per trial i: seed spec.seed + i, generate a scene, coarsen it to the extra
/// ground truth, corrupt the teacher, then harden once without constraints
/// and once through the refine engine. Accuracies are measured against the
/// fine truth, so the report quantifies what masking alone repairs.
ExperimentResult run_experiment(const SceneSpec& spec, const TeacherNoise& noise,
                                const Taxonomy& fine, const Taxonomy& coarse,
                                const OntologyRelation& rel, const RefineConfig& cfg, int trials);

std::string experiment_report_to_json(const ExperimentReport& report, const Taxonomy& fine);

/// Side-by-side panels: fine truth, unconstrained argmax, constrained result.
void write_triptych(const LabelMap& fine_map, const LabelMap& unconstrained,
                    const LabelMap& constrained, const Taxonomy& fine, const std::string& path);

}  // namespace ontoseg
