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

#include "core/refine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "core/error.hpp"

namespace ontoseg {
namespace {

int clamp_index(int v, int hi) { return v < 0 ? 0 : (v > hi ? hi : v); }

SoftPrediction mirror_columns(const SoftPrediction& in) {
    SoftPrediction out;
    out.height = in.height;
    out.width = in.width;
    out.channels = in.channels;
    out.scores.resize(in.scores.size());
    const std::size_t row_stride = static_cast<std::size_t>(in.width) * in.channels;
    for (int y = 0; y < in.height; ++y) {
        const float* src = in.scores.data() + static_cast<std::size_t>(y) * row_stride;
        float* dst = out.scores.data() + static_cast<std::size_t>(y) * row_stride;
        for (int x = 0; x < in.width; ++x) {
            const float* s = src + static_cast<std::size_t>(in.width - 1 - x) * in.channels;
            float* d = dst + static_cast<std::size_t>(x) * in.channels;
            std::copy(s, s + in.channels, d);
        }
    }
    return out;
}

/// Bilinear resample with half pixel centers, then renormalize each pixel.
/// Sample coordinates and blending run in doubles; the blended value is cast
/// to float before the renormalizing division so the arithmetic is exactly
/// reproducible by a scalar reimplementation.
SoftPrediction resize_bilinear(const SoftPrediction& in, int out_h, int out_w) {
    SoftPrediction out;
    out.height = out_h;
    out.width = out_w;
    out.channels = in.channels;
    out.scores.resize(static_cast<std::size_t>(out_h) * out_w * in.channels);
    const int c = in.channels;
    for (int y = 0; y < out_h; ++y) {
        double sy = ((y + 0.5) * static_cast<double>(in.height)) / out_h - 0.5;
        int y0 = static_cast<int>(std::floor(sy));
        double fy = sy - y0;
        int y0c = clamp_index(y0, in.height - 1);
        int y1c = clamp_index(y0 + 1, in.height - 1);
        for (int x = 0; x < out_w; ++x) {
            double sx = ((x + 0.5) * static_cast<double>(in.width)) / out_w - 0.5;
            int x0 = static_cast<int>(std::floor(sx));
            double fx = sx - x0;
            int x0c = clamp_index(x0, in.width - 1);
            int x1c = clamp_index(x0 + 1, in.width - 1);
            const float* p00 = in.scores.data() + in.index(y0c, x0c, 0);
            const float* p01 = in.scores.data() + in.index(y0c, x1c, 0);
            const float* p10 = in.scores.data() + in.index(y1c, x0c, 0);
            const float* p11 = in.scores.data() + in.index(y1c, x1c, 0);
            float* dst = out.scores.data() + out.index(y, x, 0);
            for (int k = 0; k < c; ++k) {
                double top = p00[k] * (1.0 - fx) + p01[k] * fx;
                double bot = p10[k] * (1.0 - fx) + p11[k] * fx;
                dst[k] = static_cast<float>(top * (1.0 - fy) + bot * fy);
            }
            double sum = 0.0;
            for (int k = 0; k < c; ++k) sum += dst[k];
            if (!(sum > 0.0)) throw internal_error("resample produced a zero-mass pixel");
            for (int k = 0; k < c; ++k)
                dst[k] = static_cast<float>(static_cast<double>(dst[k]) / sum);
        }
    }
    return out;
}

}  // namespace

void RefineReport::merge(const RefineReport& other) {
    pixels_total += other.pixels_total;
    pixels_constrained += other.pixels_constrained;
    pixels_fallback += other.pixels_fallback;
    pixels_changed_by_mask += other.pixels_changed_by_mask;
    if (class_histogram.size() < other.class_histogram.size())
        class_histogram.resize(other.class_histogram.size(), 0);
    for (std::size_t i = 0; i < other.class_histogram.size(); ++i)
        class_histogram[i] += other.class_histogram[i];
    void_pixels += other.void_pixels;
    for (const auto& p : other.fallback_examples) {
        if (fallback_examples.size() >= kMaxFallbackExamples) break;
        fallback_examples.push_back(p);
    }
}

SoftPrediction inverse_transform(const SoftPrediction& pred, const AugDescriptor& desc) {
    if (desc.base_height < 1 || desc.base_width < 1 || !(desc.scale > 0.0f))
        throw argument_error("inverse_transform: invalid descriptor");
    int want_h = scaled_dim(desc.base_height, desc.scale);
    int want_w = scaled_dim(desc.base_width, desc.scale);
    if (pred.height != want_h || pred.width != want_w)
        throw argument_error("inverse_transform: tensor is " + std::to_string(pred.height) + "x" +
                             std::to_string(pred.width) + " but descriptor base " +
                             std::to_string(desc.base_height) + "x" +
                             std::to_string(desc.base_width) + " at its scale expects " +
                             std::to_string(want_h) + "x" + std::to_string(want_w));
    const SoftPrediction* cur = &pred;
    SoftPrediction unflipped;
    if (desc.hflip) {
        unflipped = mirror_columns(pred);
        cur = &unflipped;
    }
    if (cur->height == desc.base_height && cur->width == desc.base_width) return *cur;
    return resize_bilinear(*cur, desc.base_height, desc.base_width);
}

SoftPrediction fuse_tta(const std::vector<SoftPrediction>& preds) {
    if (preds.empty()) throw argument_error("fuse_tta: empty input list");
    const SoftPrediction& first = preds.front();
    for (const SoftPrediction& p : preds)
        if (p.height != first.height || p.width != first.width || p.channels != first.channels)
            throw argument_error("fuse_tta: input dimensions differ");
    if (preds.size() == 1) return first;  // sum/1 reproduces the input bit-exactly

    SoftPrediction out;
    out.height = first.height;
    out.width = first.width;
    out.channels = first.channels;
    out.scores.resize(first.scores.size());
    const double n = static_cast<double>(preds.size());
    const std::size_t row_stride = static_cast<std::size_t>(first.width) * first.channels;
    // Row-sized accumulator; each cell still sums its inputs in list order.
    std::vector<double> acc(row_stride);
    for (int y = 0; y < first.height; ++y) {
        std::fill(acc.begin(), acc.end(), 0.0);
        const std::size_t off = static_cast<std::size_t>(y) * row_stride;
        for (const SoftPrediction& p : preds) {
            const float* src = p.scores.data() + off;
            for (std::size_t i = 0; i < row_stride; ++i) acc[i] += src[i];
        }
        float* dst = out.scores.data() + off;
        for (std::size_t i = 0; i < row_stride; ++i) dst[i] = static_cast<float>(acc[i] / n);
    }
    return out;
}

MaskResult constraint_mask(const SoftPrediction& pred, const LabelMap& gt,
                           const ConstraintTable& table, const RefineConfig& cfg) {
    if (pred.height != gt.height || pred.width != gt.width)
        throw argument_error("constraint_mask: prediction and ground truth dimensions differ");
    if (pred.channels != table.source_class_count())
        throw argument_error("constraint_mask: prediction has " + std::to_string(pred.channels) +
                             " channels but the constraint table covers " +
                             std::to_string(table.source_class_count()) + " classes");

    MaskResult res;
    res.pred.height = pred.height;
    res.pred.width = pred.width;
    res.pred.channels = pred.channels;
    res.pred.scores.resize(pred.scores.size());
    res.fallback.assign(pred.pixel_count(), 0);
    res.report.pixels_total = static_cast<std::int64_t>(pred.pixel_count());
    res.report.class_histogram.assign(pred.channels, 0);

    const int c = pred.channels;
    for (int y = 0; y < pred.height; ++y) {
        for (int x = 0; x < pred.width; ++x) {
            const float* src = pred.scores.data() + pred.index(y, x, 0);
            float* dst = res.pred.scores.data() + res.pred.index(y, x, 0);
            const ClassSet& row = table.row_for(gt.at(y, x));
            if (!row.all()) ++res.report.pixels_constrained;

            int arg_before = 0;
            float best_before = src[0];
            for (int k = 1; k < c; ++k)
                if (src[k] > best_before) {
                    best_before = src[k];
                    arg_before = k;
                }

            double sum = 0.0;
            for (int k = 0; k < c; ++k) {
                float v = row.test(k) ? src[k] : 0.0f;
                dst[k] = v;
                sum += v;
            }

            if (sum == 0.0) {
                ++res.report.pixels_fallback;
                res.fallback[static_cast<std::size_t>(y) * pred.width + x] = 1;
                if (cfg.report_fallback_pixels &&
                    res.report.fallback_examples.size() < kMaxFallbackExamples)
                    res.report.fallback_examples.emplace_back(y, x);
                switch (cfg.fallback) {
                    case FallbackPolicy::Error:
                        throw validation_error(
                            "contradictory pixel at (" + std::to_string(y) + "," +
                            std::to_string(x) +
                            "): no allowed class carries prediction mass for ground-truth id " +
                            std::to_string(static_cast<int>(gt.at(y, x))));
                    case FallbackPolicy::Void:
                        // Scores stay zero; hardening emits the void label.
                        ++res.report.pixels_changed_by_mask;
                        break;
                    case FallbackPolicy::UnconstrainedArgmax:
                        std::copy(src, src + c, dst);
                        break;
                }
                continue;
            }

            if (cfg.renormalize_output)
                for (int k = 0; k < c; ++k)
                    dst[k] = static_cast<float>(static_cast<double>(dst[k]) / sum);

            int arg_after = 0;
            float best_after = dst[0];
            for (int k = 1; k < c; ++k)
                if (dst[k] > best_after) {
                    best_after = dst[k];
                    arg_after = k;
                }
            if (arg_after != arg_before) ++res.report.pixels_changed_by_mask;
        }
    }
    return res;
}

LabelMap harden(const SoftPrediction& pred, const std::vector<std::uint8_t>& fallback,
                const RefineConfig& cfg) {
    if (!fallback.empty() && fallback.size() != pred.pixel_count())
        throw argument_error("harden: fallback mask size mismatch");
    LabelMap out;
    out.height = pred.height;
    out.width = pred.width;
    out.ids.resize(pred.pixel_count());
    const int c = pred.channels;
    for (std::size_t p = 0; p < out.ids.size(); ++p) {
        if (!fallback.empty() && fallback[p] != 0 && cfg.fallback == FallbackPolicy::Void) {
            out.ids[p] = kVoidLabel;
            continue;
        }
        const float* src = pred.scores.data() + p * c;
        int arg = 0;
        float best = src[0];
        for (int k = 1; k < c; ++k)
            if (src[k] > best) {
                best = src[k];
                arg = k;
            }
        out.ids[p] = static_cast<std::uint8_t>(arg);
    }
    return out;
}

RefineResult refine_image(const std::vector<AugPrediction>& aug_preds, const LabelMap& gt,
                          const ConstraintTable& table, const RefineConfig& cfg) {
    if (aug_preds.empty()) throw argument_error("refine_image: no augmented predictions");
    for (const AugPrediction& ap : aug_preds)
        if (ap.desc.base_height != gt.height || ap.desc.base_width != gt.width)
            throw argument_error("refine_image: descriptor base " +
                                 std::to_string(ap.desc.base_height) + "x" +
                                 std::to_string(ap.desc.base_width) +
                                 " does not match ground truth " + std::to_string(gt.height) +
                                 "x" + std::to_string(gt.width));

    std::vector<std::size_t> order(aug_preds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const AugDescriptor& da = aug_preds[a].desc;
        const AugDescriptor& db = aug_preds[b].desc;
        if (da.scale != db.scale) return da.scale < db.scale;
        return da.hflip < db.hflip;
    });
    for (std::size_t i = 1; i < order.size(); ++i) {
        const AugDescriptor& a = aug_preds[order[i - 1]].desc;
        const AugDescriptor& b = aug_preds[order[i]].desc;
        if (a.scale == b.scale && a.hflip == b.hflip)
            throw argument_error("refine_image: duplicate augmentation " +
                                 format_aug_name(a.hflip, a.scale));
    }

    SoftPrediction fused;
    {
        std::vector<SoftPrediction> canonical;
        canonical.reserve(aug_preds.size());
        for (std::size_t idx : order)
            canonical.push_back(inverse_transform(aug_preds[idx].pred, aug_preds[idx].desc));
        fused = fuse_tta(canonical);
    }

    MaskResult masked = constraint_mask(fused, gt, table, cfg);
    RefineResult res;
    res.labels = harden(masked.pred, masked.fallback, cfg);
    res.report = std::move(masked.report);
    res.masked = std::move(masked.pred);
    for (std::uint8_t id : res.labels.ids) {
        if (id == kVoidLabel)
            ++res.report.void_pixels;
        else
            ++res.report.class_histogram[id];
    }
    return res;
}

}  // namespace ontoseg
