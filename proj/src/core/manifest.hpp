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
#include <string_view>
#include <vector>

namespace ontoseg {

struct FrameEntry {
    std::string id;
    std::string gt_path;
    std::string image_path;  // optional
    std::string split;       // "", "train" or "val"
};

/// One dataset declaration: which taxonomy its labels use, how to reach the
/// source label space, and the ordered frame list. Contiguity marks frame
/// sequences recorded in close spatio-temporal proximity, the precondition
/// for subsampling.
struct DatasetManifest {
    std::string name;
    std::string taxonomy_name;
    std::string ontology_path;  // empty when the dataset is already in the source space
    bool contiguous = false;
    int sampling_step = 1;
    std::vector<FrameEntry> frames;
};

DatasetManifest parse_manifest(std::string_view text);
DatasetManifest load_manifest(const std::string& path);
std::string serialize_manifest(const DatasetManifest& manifest);

struct SubsampleResult {
    DatasetManifest manifest;
    /// Set when a step > 1 was requested on a non-contiguous dataset; the
    /// frame list is returned unchanged in that case.
    bool skipped_non_contiguous = false;
};

/// Keeps frames at indices 0, step, 2*step, ... of the declaration order.
SubsampleResult subsample(const DatasetManifest& manifest, int step);

struct PairedFrame {
    FrameEntry frame;
    /// One path per expected augmentation, in the order the names were given.
    std::vector<std::string> prediction_paths;
};

struct PairingReport {
    std::vector<PairedFrame> complete;
    struct Incomplete {
        std::string frame_id;
        std::vector<std::string> missing;  // file names such as "s125.sftp"
    };
    std::vector<Incomplete> incomplete;
};

/// Pairs manifest frames with prediction files laid out as
/// `<root>/<frame-id>/<aug-name>.sftp`.
PairingReport pair_frames(const DatasetManifest& manifest, const std::string& prediction_root,
                          const std::vector<std::string>& expected_augs);

struct StatsEntry {
    std::string name;
    std::uint64_t frames = 0;
    bool contiguous = false;
};

/// A group of datasets whose frame counts are reported relative to the group
/// total. Built either from a `.manifestset` declaration file or from parsed
/// manifests.
struct StatsSet {
    std::string name;  // may be empty
    std::vector<StatsEntry> entries;
};

StatsSet parse_manifestset(std::string_view text);
StatsSet load_manifestset(const std::string& path);

StatsEntry stats_entry_from_manifest(const DatasetManifest& manifest);

/// Integer percent, rounded half away from zero.
int percent_rounded(std::uint64_t frames, std::uint64_t total);

/// Table cell: the rounded percent, or "<1" when a nonzero count rounds to 0.
std::string rel_cell(std::uint64_t frames, std::uint64_t total);

std::string stats_to_text(const std::vector<StatsSet>& sets);
std::string stats_to_json(const std::vector<StatsSet>& sets);

}  // namespace ontoseg
