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
#include <string_view>
#include <vector>

#include "core/taxonomy.hpp"

namespace ontoseg {

/// Label value reserved for void pixels in 8-bit label maps.
inline constexpr std::uint8_t kVoidLabel = 255;

/// Dense per-pixel class scores, row-major with the channel index minor:
/// scores[(y * width + x) * channels + c].
struct SoftPrediction {
    int height = 0;
    int width = 0;
    int channels = 0;
    std::vector<float> scores;

    std::size_t index(int y, int x, int c) const {
        return (static_cast<std::size_t>(y) * width + x) * channels + c;
    }
    float at(int y, int x, int c) const { return scores[index(y, x, c)]; }
    float& at(int y, int x, int c) { return scores[index(y, x, c)]; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
};

/// Dense per-pixel class ids; 255 is the void sentinel.
struct LabelMap {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> ids;

    std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width + x; }
    std::uint8_t at(int y, int x) const { return ids[index(y, x)]; }
    std::uint8_t& at(int y, int x) { return ids[index(y, x)]; }
    std::size_t pixel_count() const { return static_cast<std::size_t>(height) * width; }
};

/// Geometry of one test-time augmentation relative to the canonical frame.
struct AugDescriptor {
    bool hflip = false;
    float scale = 1.0f;
    int base_height = 0;
    int base_width = 0;
};

/// Dimension of a scaled axis; rounding is half away from zero.
int scaled_dim(int base, float scale);

/// The augmentation scales the toolkit accepts by default.
const std::vector<float>& standard_scales();
bool is_standard_scale(float scale);

/// `s<scale*100, zero padded to 3>[_flip]`, e.g. 0.75 flipped -> "s075_flip".
std::string format_aug_name(bool hflip, float scale);

struct AugName {
    bool hflip = false;
    float scale = 1.0f;
};
std::optional<AugName> parse_aug_name(std::string_view name);

/// The 14 standard augmentation names (7 scales, each plain and flipped),
/// sorted ascending by (scale, flip).
const std::vector<std::string>& standard_aug_names();

struct SoftReadResult {
    SoftPrediction pred;
    AugDescriptor desc;
    std::int64_t renormalized_pixels = 0;
};

/// Reads a `.sftp` tensor. Scores are validated (finite, non-negative) and
/// pixels whose channel sum drifts from 1 by more than 1e-4 are renormalized;
/// drift beyond 10% or a zero sum is an error. The descriptor comes from the
/// embedded header, overridden by a `<name>.aug.json` sidecar when present;
/// base dimensions default to round(dim / scale).
SoftReadResult read_soft(const std::string& path, bool allow_any_scale = false);

/// Writes a `.sftp` tensor. A sidecar is written automatically when the base
/// dimensions cannot be recovered from the scaled dimensions by rounding.
void write_soft(const SoftPrediction& pred, const AugDescriptor& desc, const std::string& path);

/// Reads an 8-bit grayscale PNG and validates every id against the taxonomy
/// (255 is always legal as void).
LabelMap read_labelmap(const std::string& path, const Taxonomy& taxonomy);

void write_labelmap(const std::string& path, const LabelMap& map);

/// Renders a label map with the taxonomy palette; void pixels are black.
void write_colorized(const LabelMap& map, const Taxonomy& taxonomy, const std::string& path);

}  // namespace ontoseg
