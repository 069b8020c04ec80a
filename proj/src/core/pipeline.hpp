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
#include <optional>
#include <string>
#include <vector>

#include "core/manifest.hpp"
#include "core/metrics.hpp"
#include "core/refine.hpp"

namespace ontoseg {

struct RefineJobOptions {
    std::string manifest_path;
    /// Root for manifest-relative ground-truth paths; empty = manifest's directory.
    std::string gt_root;
    std::string prediction_root;
    std::string gt_taxonomy_path;
    std::string source_taxonomy_path;
    /// Overrides the manifest's ontology declaration when non-empty.
    std::string ontology_path;
    /// Gets `pseudo-labels/` and `reports/` subdirectories.
    std::string output_dir;
    /// Expected augmentation names; empty = the standard 14.
    std::vector<std::string> augs;
    /// 0 = use the manifest's sampling step.
    int step = 0;
    FallbackPolicy fallback = FallbackPolicy::Void;
    bool colorize = false;
    bool emit_soft = false;
    bool allow_any_scale = false;
    int workers = 1;
};

struct FrameFailure {
    std::string frame_id;
    std::string message;
};

struct RefineJobResult {
    RefineReport aggregate;
    std::int64_t frames_total = 0;      // after subsampling
    std::int64_t frames_processed = 0;  // labels written
    std::int64_t frames_incomplete = 0;
    std::int64_t frames_failed = 0;  // load or refine errors
    std::vector<FrameFailure> failures;
    std::int64_t renormalized_pixels = 0;
    bool subsample_skipped_non_contiguous = false;
    std::string aggregate_json;  // also written to reports/aggregate.json
};

/// Batch refinement over one manifest: pair predictions, subsample, refine
/// every frame, write one label PNG per frame plus per-frame and aggregate
/// reports. Failures never stop the batch; they are counted and listed so a
/// serial and a parallel run always process the same frame set.
RefineJobResult run_refine_job(const RefineJobOptions& opts);

struct EvaluateJobOptions {
    std::string pred_manifest_path;
    std::string gt_manifest_path;
    std::string taxonomy_path;
    /// Mean IoU from an earlier report, echoed as the init column.
    std::optional<double> baseline_miou;
    int workers = 1;
};

struct EvaluateJobResult {
    EvalReport report;
    std::string json;
    std::string text;
};

/// Pairs the two manifests index by index (ids must agree) and scores the
/// first against the second.
EvaluateJobResult run_evaluate_job(const EvaluateJobOptions& opts);

struct StatsJobResult {
    std::vector<StatsSet> sets;
    std::string text;
    std::string json;
};

/// Each `.manifestset` input forms one table; consecutive `.manifest` inputs
/// are grouped into a shared table so their percentages are relative to the
/// group.
StatsJobResult run_stats_job(const std::vector<std::string>& inputs);

}  // namespace ontoseg
