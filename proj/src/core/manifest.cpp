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

#include "core/manifest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "core/error.hpp"
#include "core/text.hpp"

namespace ontoseg {
namespace {

namespace fs = std::filesystem;

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw parse_error("line " + std::to_string(line) + ": " + msg);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error(path + ": cannot open");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Joins tokens [from, to) with single spaces; manifest names may contain
/// spaces (they are display names, not paths).
std::string join_tokens(const std::vector<std::string_view>& tokens, std::size_t from,
                        std::size_t to) {
    std::string out;
    for (std::size_t i = from; i < to; ++i) {
        if (!out.empty()) out += ' ';
        out += tokens[i];
    }
    return out;
}

}  // namespace

DatasetManifest parse_manifest(std::string_view text) {
    DatasetManifest m;
    bool have_dataset = false;
    std::unordered_set<std::string> seen_ids;

    const auto lines = text::split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        auto tokens = text::split_ws(text::trim(text::strip_comment(lines[li])));
        if (tokens.empty()) continue;

        if (tokens[0] == "dataset") {
            if (have_dataset) fail(line_no, "only one dataset declaration per manifest");
            std::size_t tax_pos = 0;
            for (std::size_t i = 1; i < tokens.size(); ++i)
                if (tokens[i] == "taxonomy") {
                    tax_pos = i;
                    break;
                }
            if (tax_pos == 0) fail(line_no, "dataset line needs 'taxonomy <name>'");
            if (tax_pos == 1) fail(line_no, "dataset name missing");
            m.name = join_tokens(tokens, 1, tax_pos);
            if (tax_pos + 1 >= tokens.size()) fail(line_no, "taxonomy name missing");
            m.taxonomy_name = tokens[tax_pos + 1];

            std::size_t i = tax_pos + 2;
            bool saw_ontology = false, saw_contiguous = false, saw_step = false;
            while (i < tokens.size()) {
                if (tokens[i] == "ontology") {
                    if (saw_ontology) fail(line_no, "duplicate 'ontology'");
                    if (i + 1 >= tokens.size()) fail(line_no, "'ontology' needs a path");
                    m.ontology_path = tokens[i + 1];
                    saw_ontology = true;
                    i += 2;
                } else if (tokens[i] == "contiguous") {
                    if (saw_contiguous) fail(line_no, "duplicate 'contiguous'");
                    m.contiguous = true;
                    saw_contiguous = true;
                    i += 1;
                } else if (tokens[i] == "step") {
                    if (saw_step) fail(line_no, "duplicate 'step'");
                    if (i + 1 >= tokens.size()) fail(line_no, "'step' needs a count");
                    auto k = text::parse_int(tokens[i + 1]);
                    if (!k || *k < 1) fail(line_no, "step must be a positive integer");
                    m.sampling_step = static_cast<int>(*k);
                    saw_step = true;
                    i += 2;
                } else {
                    fail(line_no, "unexpected token '" + std::string(tokens[i]) + "'");
                }
            }
            have_dataset = true;
        } else if (tokens[0] == "frame") {
            if (!have_dataset) fail(line_no, "frame before dataset declaration");
            if (tokens.size() < 2) fail(line_no, "frame id missing");
            FrameEntry f;
            f.id = tokens[1];
            if (!seen_ids.insert(f.id).second) fail(line_no, "duplicate frame id '" + f.id + "'");
            std::size_t i = 2;
            bool saw_gt = false, saw_image = false, saw_split = false;
            while (i < tokens.size()) {
                if (tokens[i] == "gt") {
                    if (saw_gt) fail(line_no, "duplicate 'gt'");
                    if (i + 1 >= tokens.size()) fail(line_no, "'gt' needs a path");
                    f.gt_path = tokens[i + 1];
                    saw_gt = true;
                    i += 2;
                } else if (tokens[i] == "image") {
                    if (saw_image) fail(line_no, "duplicate 'image'");
                    if (i + 1 >= tokens.size()) fail(line_no, "'image' needs a path");
                    f.image_path = tokens[i + 1];
                    saw_image = true;
                    i += 2;
                } else if (tokens[i] == "split") {
                    if (saw_split) fail(line_no, "duplicate 'split'");
                    if (i + 1 >= tokens.size()) fail(line_no, "'split' needs train or val");
                    if (tokens[i + 1] != "train" && tokens[i + 1] != "val")
                        fail(line_no, "unknown split '" + std::string(tokens[i + 1]) + "'");
                    f.split = tokens[i + 1];
                    saw_split = true;
                    i += 2;
                } else {
                    fail(line_no, "unexpected token '" + std::string(tokens[i]) + "'");
                }
            }
            if (!saw_gt) fail(line_no, "frame '" + f.id + "' has no gt path");
            m.frames.push_back(std::move(f));
        } else {
            fail(line_no, "unknown directive '" + std::string(tokens[0]) + "'");
        }
    }
    if (!have_dataset) throw parse_error("manifest has no dataset declaration");
    return m;
}

DatasetManifest load_manifest(const std::string& path) {
    try {
        return parse_manifest(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::io) throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

std::string serialize_manifest(const DatasetManifest& manifest) {
    std::ostringstream os;
    os << "dataset " << manifest.name << " taxonomy " << manifest.taxonomy_name;
    if (!manifest.ontology_path.empty()) os << " ontology " << manifest.ontology_path;
    if (manifest.contiguous) os << " contiguous";
    if (manifest.sampling_step != 1) os << " step " << manifest.sampling_step;
    os << "\n";
    for (const FrameEntry& f : manifest.frames) {
        os << "frame " << f.id << " gt " << f.gt_path;
        if (!f.image_path.empty()) os << " image " << f.image_path;
        if (!f.split.empty()) os << " split " << f.split;
        os << "\n";
    }
    return os.str();
}

SubsampleResult subsample(const DatasetManifest& manifest, int step) {
    if (step < 1) throw argument_error("subsample step must be >= 1");
    SubsampleResult res;
    res.manifest = manifest;
    if (step == 1) return res;
    if (!manifest.contiguous) {
        res.skipped_non_contiguous = true;
        return res;
    }
    res.manifest.frames.clear();
    for (std::size_t i = 0; i < manifest.frames.size(); i += step)
        res.manifest.frames.push_back(manifest.frames[i]);
    res.manifest.sampling_step = 1;
    return res;
}

PairingReport pair_frames(const DatasetManifest& manifest, const std::string& prediction_root,
                          const std::vector<std::string>& expected_augs) {
    if (expected_augs.empty()) throw argument_error("pair_frames: no augmentation names given");
    if (prediction_root.empty()) throw argument_error("pair_frames: empty prediction root");
    fs::path root(prediction_root);
    std::error_code ec;
    if (!fs::is_directory(root, ec)) throw io_error(prediction_root + ": not a directory");

    PairingReport report;
    for (const FrameEntry& frame : manifest.frames) {
        fs::path dir = root / frame.id;
        PairedFrame paired;
        paired.frame = frame;
        std::vector<std::string> missing;
        for (const std::string& aug : expected_augs) {
            fs::path file = dir / (aug + ".sftp");
            if (fs::is_regular_file(file, ec))
                paired.prediction_paths.push_back(file.string());
            else
                missing.push_back(aug + ".sftp");
        }
        if (missing.empty())
            report.complete.push_back(std::move(paired));
        else
            report.incomplete.push_back({frame.id, std::move(missing)});
    }
    return report;
}

StatsSet parse_manifestset(std::string_view text) {
    StatsSet set;
    bool have_name = false;
    const auto lines = text::split_lines(text);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        auto tokens = text::split_ws(text::trim(text::strip_comment(lines[li])));
        if (tokens.empty()) continue;

        if (tokens[0] == "set") {
            if (have_name) fail(line_no, "duplicate 'set' line");
            if (!set.entries.empty()) fail(line_no, "'set' must come before dataset lines");
            if (tokens.size() < 2) fail(line_no, "'set' needs a name");
            set.name = join_tokens(tokens, 1, tokens.size());
            have_name = true;
        } else if (tokens[0] == "dataset") {
            std::size_t frames_pos = 0;
            for (std::size_t i = 1; i < tokens.size(); ++i)
                if (tokens[i] == "frames") {
                    frames_pos = i;
                    break;
                }
            if (frames_pos == 0) fail(line_no, "dataset line needs 'frames <count>'");
            if (frames_pos == 1) fail(line_no, "dataset name missing");
            if (frames_pos + 1 >= tokens.size()) fail(line_no, "frame count missing");
            StatsEntry entry;
            entry.name = join_tokens(tokens, 1, frames_pos);
            auto n = text::parse_int(tokens[frames_pos + 1]);
            if (!n || *n < 0) fail(line_no, "frame count must be a non-negative integer");
            entry.frames = static_cast<std::uint64_t>(*n);
            std::size_t i = frames_pos + 2;
            if (i < tokens.size() && tokens[i] == "contiguous") {
                entry.contiguous = true;
                ++i;
            }
            if (i < tokens.size()) fail(line_no, "unexpected token '" + std::string(tokens[i]) + "'");
            set.entries.push_back(std::move(entry));
        } else {
            fail(line_no, "unknown directive '" + std::string(tokens[0]) + "'");
        }
    }
    return set;
}

StatsSet load_manifestset(const std::string& path) {
    try {
        return parse_manifestset(read_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::io) throw;
        throw Error(e.code(), path + ": " + e.what());
    }
}

StatsEntry stats_entry_from_manifest(const DatasetManifest& manifest) {
    StatsEntry entry;
    entry.name = manifest.name;
    entry.frames = manifest.frames.size();
    entry.contiguous = manifest.contiguous;
    return entry;
}

int percent_rounded(std::uint64_t frames, std::uint64_t total) {
    if (total == 0) return 0;
    return static_cast<int>((200 * frames + total) / (2 * total));
}

std::string rel_cell(std::uint64_t frames, std::uint64_t total) {
    int pct = percent_rounded(frames, total);
    if (pct == 0 && frames > 0) return "<1";
    return std::to_string(pct);
}

std::string stats_to_text(const std::vector<StatsSet>& sets) {
    std::ostringstream os;
    bool first = true;
    for (const StatsSet& set : sets) {
        if (!first) os << "\n";
        first = false;

        std::uint64_t total = 0;
        for (const StatsEntry& e : set.entries) total += e.frames;
        std::string total_name = set.name.empty() ? "Total" : "Total " + set.name;

        std::size_t name_w = std::max<std::size_t>({7, total_name.size()});
        for (const StatsEntry& e : set.entries) name_w = std::max(name_w, e.name.size());
        std::string total_frames = text::with_thousands(total);
        std::size_t frames_w = std::max<std::size_t>(6, total_frames.size());
        for (const StatsEntry& e : set.entries)
            frames_w = std::max(frames_w, text::with_thousands(e.frames).size());
        const std::size_t rel_w = 8;  // fits the header "Rel. [%]"

        auto pad_left = [](const std::string& s, std::size_t w) {
            return std::string(w - std::min(w, s.size()), ' ') + s;
        };
        auto pad_right = [](const std::string& s, std::size_t w) {
            return s + std::string(w - std::min(w, s.size()), ' ');
        };

        os << pad_right("Dataset", name_w) << "  " << pad_left("Frames", frames_w) << "  "
           << pad_left("Rel. [%]", rel_w) << "  Contiguous\n";
        for (const StatsEntry& e : set.entries) {
            std::string line = pad_right(e.name, name_w) + "  " +
                               pad_left(text::with_thousands(e.frames), frames_w) + "  " +
                               pad_left(rel_cell(e.frames, total), rel_w);
            if (e.contiguous) line += "  yes";
            while (!line.empty() && line.back() == ' ') line.pop_back();
            os << line << "\n";
        }
        os << pad_right(total_name, name_w) << "  " << pad_left(total_frames, frames_w) << "\n";
    }
    return os.str();
}

std::string stats_to_json(const std::vector<StatsSet>& sets) {
    nlohmann::json doc;
    doc["schema"] = 1;
    nlohmann::json out_sets = nlohmann::json::array();
    for (const StatsSet& set : sets) {
        std::uint64_t total = 0;
        for (const StatsEntry& e : set.entries) total += e.frames;
        nlohmann::json s;
        s["name"] = set.name;
        nlohmann::json datasets = nlohmann::json::array();
        for (const StatsEntry& e : set.entries) {
            nlohmann::json d;
            d["name"] = e.name;
            d["frames"] = e.frames;
            d["rel"] = rel_cell(e.frames, total);
            d["contiguous"] = e.contiguous;
            datasets.push_back(std::move(d));
        }
        s["datasets"] = std::move(datasets);
        s["total"] = total;
        out_sets.push_back(std::move(s));
    }
    doc["sets"] = std::move(out_sets);
    return doc.dump(2) + "\n";
}

}  // namespace ontoseg
