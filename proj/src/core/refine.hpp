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
#include <utility>
#include <vector>

#include "core/ontology.hpp"
#include "core/tensor.hpp"

namespace ontoseg {

struct RefineConfig {
    FallbackPolicy fallback = FallbackPolicy::Void;
    /// Rescale masked pixels back onto the simplex (soft export wants this;
    /// hardening does not care since argmax is scale invariant).
    bool renormalize_output = false;
    double simplex_tol = 1e-4;
    /// Collect example coordinates of fallback pixels into the report.
    bool report_fallback_pixels = true;
};

struct RefineReport {
    std::int64_t pixels_total = 0;
    /// Pixels whose allowed set is a proper subset of all classes.
    std::int64_t pixels_constrained = 0;
    /// Pixels with no probability mass left after masking, handled by the
    /// fallback policy. An empty allowed set always lands here.
    std::int64_t pixels_fallback = 0;
    /// Pixels whose final label differs from the unconstrained argmax.
    std::int64_t pixels_changed_by_mask = 0;
    /// Output class histogram, filled at hardening; index = class id.
    std::vector<std::int64_t> class_histogram;
    std::int64_t void_pixels = 0;
    std::vector<std::pair<int, int>> fallback_examples;

    void merge(const RefineReport& other);
};

/// Number of fallback pixel coordinates retained per report.
inline constexpr std::size_t kMaxFallbackExamples = 32;

struct AugPrediction {
    SoftPrediction pred;
    AugDescriptor desc;
};

/// Maps an augmented prediction back to the canonical geometry: the mirror is
/// undone first, then the scale via per-channel bilinear resampling followed
/// by per-pixel renormalization. When the tensor is already at base size the
/// resampling stage is skipped entirely and scores pass through bit-exactly.
SoftPrediction inverse_transform(const SoftPrediction& pred, const AugDescriptor& desc);

/// Per-cell mean over the inputs, accumulated in doubles in list order and
/// divided once at the end. Callers wanting order independence sort the list
/// first; refine_image does so by (scale, hflip).
SoftPrediction fuse_tta(const std::vector<SoftPrediction>& preds);

struct MaskResult {
    SoftPrediction pred;
    /// One byte per pixel, 1 where the fallback policy applied.
    std::vector<std::uint8_t> fallback;
    RefineReport report;
};

/// Zeroes every score outside the allowed set of the pixel's ground-truth
/// class. Pixels left with no mass follow cfg.fallback: Error throws naming
/// the first such pixel, Void leaves the pixel empty for hardening to void,
/// UnconstrainedArgmax restores the original scores.
MaskResult constraint_mask(const SoftPrediction& pred, const LabelMap& gt,
                           const ConstraintTable& table, const RefineConfig& cfg);

/// Argmax with ties resolved to the lowest class id; pixels flagged in
/// `fallback` become void under the Void policy.
LabelMap harden(const SoftPrediction& pred, const std::vector<std::uint8_t>& fallback,
                const RefineConfig& cfg);

struct RefineResult {
    LabelMap labels;
    RefineReport report;
    /// Masked scores, renormalized when cfg.renormalize_output is set.
    SoftPrediction masked;
};

/// Staged composition: canonical sort, inverse transforms, fusion, masking,
/// hardening. Duplicate (scale, hflip) descriptors are rejected so the sort
/// order, and with it the fused sum, is independent of input order.
RefineResult refine_image(const std::vector<AugPrediction>& aug_preds, const LabelMap& gt,
                          const ConstraintTable& table, const RefineConfig& cfg);

}  // namespace ontoseg
