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

#include <numeric>
#include <string>
#include <vector>

#include <doctest.h>

#include "core/error.hpp"
#include "tmpdir.hpp"

using namespace ontoseg;

namespace {

std::string fixture(const char* rel) {
    return std::string(ONTOSEG_FIXTURE_DIR) + "/" + rel;
}

DatasetManifest contiguous_frames(int n, int step = 1) {
    DatasetManifest m;
    m.name = "synthetic";
    m.taxonomy_name = "t";
    m.contiguous = true;
    m.sampling_step = step;
    for (int i = 0; i < n; ++i) {
        FrameEntry f;
        f.id = "f" + std::to_string(i);
        f.gt_path = "gt/" + f.id + ".png";
        m.frames.push_back(std::move(f));
    }
    return m;
}

}  // namespace

TEST_CASE("parses a manifest and keeps frame order") {
    auto m = parse_manifest(
        "dataset lot-17 taxonomy parking ontology maps/parking.ont contiguous step 5\n"
        "# capture session A\n"
        "frame a gt gt/a.png image img/a.jpg split train\n"
        "frame b gt gt/b.png\n"
        "frame c gt gt/c.png split val\n");
    CHECK(m.name == "lot-17");
    CHECK(m.taxonomy_name == "parking");
    CHECK(m.ontology_path == "maps/parking.ont");
    CHECK(m.contiguous);
    CHECK(m.sampling_step == 5);
    REQUIRE(m.frames.size() == 3);
    CHECK(m.frames[0].id == "a");
    CHECK(m.frames[1].id == "b");
    CHECK(m.frames[2].id == "c");
    CHECK(m.frames[0].image_path == "img/a.jpg");
    CHECK(m.frames[0].split == "train");
    CHECK(m.frames[1].split.empty());
    CHECK(m.frames[2].gt_path == "gt/c.png");
}

TEST_CASE("dataset names may contain spaces") {
    auto m = parse_manifest(
        "dataset Mapillary Vistas taxonomy mapillary-vistas\n"
        "frame one gt gt/one.png\n");
    CHECK(m.name == "Mapillary Vistas");
    CHECK_FALSE(m.contiguous);
    CHECK(m.sampling_step == 1);
}

TEST_CASE("rejects duplicate frame ids") {
    CHECK_THROWS_WITH_AS(parse_manifest("dataset d taxonomy t\n"
                                        "frame a gt g1.png\n"
                                        "frame a gt g2.png\n"),
                         "line 3: duplicate frame id 'a'", Error);
}

TEST_CASE("rejects malformed manifests with line numbers") {
    CHECK_THROWS_WITH_AS(parse_manifest("frame a gt g.png\n"),
                         "line 1: frame before dataset declaration", Error);
    CHECK_THROWS_WITH_AS(parse_manifest("dataset d taxonomy t\nframe\n"),
                         "line 2: frame id missing", Error);
    CHECK_THROWS_WITH_AS(parse_manifest("dataset d taxonomy t\nframe a image i.jpg\n"),
                         "line 2: frame 'a' has no gt path", Error);
    CHECK_THROWS_WITH_AS(parse_manifest("dataset d taxonomy t step 0\n"),
                         "line 1: step must be a positive integer", Error);
    CHECK_THROWS_WITH_AS(parse_manifest("dataset d taxonomy t\nframe a gt g.png split test\n"),
                         "line 2: unknown split 'test'", Error);
    CHECK_THROWS_WITH_AS(parse_manifest("dataset d\n"),
                         "line 1: dataset line needs 'taxonomy <name>'", Error);
    CHECK_THROWS_WITH_AS(parse_manifest("# nothing\n"),
                         "manifest has no dataset declaration", Error);
}

TEST_CASE("serialize then parse preserves the manifest") {
    auto m = parse_manifest(
        "dataset lot-17 taxonomy parking ontology maps/parking.ont contiguous step 5\n"
        "frame a gt gt/a.png image img/a.jpg split train\n"
        "frame b gt gt/b.png\n");
    auto round = parse_manifest(serialize_manifest(m));
    CHECK(round.name == m.name);
    CHECK(round.taxonomy_name == m.taxonomy_name);
    CHECK(round.ontology_path == m.ontology_path);
    CHECK(round.contiguous == m.contiguous);
    CHECK(round.sampling_step == m.sampling_step);
    REQUIRE(round.frames.size() == m.frames.size());
    for (std::size_t i = 0; i < m.frames.size(); ++i) {
        CHECK(round.frames[i].id == m.frames[i].id);
        CHECK(round.frames[i].gt_path == m.frames[i].gt_path);
        CHECK(round.frames[i].image_path == m.frames[i].image_path);
        CHECK(round.frames[i].split == m.frames[i].split);
    }
}

TEST_CASE("subsampling keeps every step-th frame of a contiguous set") {
    auto m = contiguous_frames(10);
    auto one = subsample(m, 1);
    CHECK_FALSE(one.skipped_non_contiguous);
    CHECK(one.manifest.frames.size() == 10);

    auto third = subsample(m, 3);
    REQUIRE(third.manifest.frames.size() == 4);
    CHECK(third.manifest.frames[0].id == "f0");
    CHECK(third.manifest.frames[1].id == "f3");
    CHECK(third.manifest.frames[2].id == "f6");
    CHECK(third.manifest.frames[3].id == "f9");

    CHECK_THROWS_AS(subsample(m, 0), Error);
}

TEST_CASE("repeated subsampling composes multiplicatively") {
    auto m = contiguous_frames(140000);
    auto once = subsample(m, 20);
    CHECK(once.manifest.frames.size() == 7000);
    auto twice = subsample(once.manifest, 2);
    CHECK(twice.manifest.frames.size() == 3500);

    auto direct = subsample(m, 40);
    REQUIRE(direct.manifest.frames.size() == twice.manifest.frames.size());
    for (std::size_t i = 0; i < direct.manifest.frames.size(); ++i)
        CHECK(direct.manifest.frames[i].id == twice.manifest.frames[i].id);
}

TEST_CASE("non-contiguous datasets are never thinned") {
    auto m = contiguous_frames(10);
    m.contiguous = false;
    auto res = subsample(m, 3);
    CHECK(res.skipped_non_contiguous);
    CHECK(res.manifest.frames.size() == 10);
    // Step 1 is a no-op everywhere, so no skip is reported.
    CHECK_FALSE(subsample(m, 1).skipped_non_contiguous);
}

TEST_CASE("pairing matches frames to per-augmentation files") {
    testutil::TmpDir dir;
    auto m = parse_manifest(
        "dataset d taxonomy t\n"
        "frame a gt gt/a.png\n"
        "frame b gt gt/b.png\n");
    const std::vector<std::string> augs = {"s100", "s050_flip"};
    testutil::write_file(dir.str("preds/a/s100.sftp"), "x");
    testutil::write_file(dir.str("preds/a/s050_flip.sftp"), "x");
    testutil::write_file(dir.str("preds/b/s100.sftp"), "x");

    PairingReport report = pair_frames(m, dir.str("preds"), augs);
    REQUIRE(report.complete.size() == 1);
    CHECK(report.complete[0].frame.id == "a");
    REQUIRE(report.complete[0].prediction_paths.size() == 2);
    CHECK(report.complete[0].prediction_paths[0] == dir.str("preds/a/s100.sftp"));
    REQUIRE(report.incomplete.size() == 1);
    CHECK(report.incomplete[0].frame_id == "b");
    CHECK(report.incomplete[0].missing == std::vector<std::string>{"s050_flip.sftp"});

    CHECK_THROWS_AS(pair_frames(m, dir.str("missing-root"), augs), Error);
    CHECK_THROWS_AS(pair_frames(m, dir.str("preds"), {}), Error);
}

TEST_CASE("manifest sets parse name, counts and contiguity") {
    auto set = parse_manifestset(
        "set demo\n"
        "dataset Big City 12,000 frames 12000 contiguous\n");
    CHECK(set.name == "demo");
    REQUIRE(set.entries.size() == 1);
    CHECK(set.entries[0].name == "Big City 12,000");
    CHECK(set.entries[0].frames == 12000);
    CHECK(set.entries[0].contiguous);

    CHECK_THROWS_AS(parse_manifestset("dataset X frames -3\n"), Error);
    CHECK_THROWS_AS(parse_manifestset("dataset X frames many\n"), Error);
}

TEST_CASE("the bundled urban set sums to its published total") {
    auto urban = load_manifestset(fixture("tables/urban.manifestset"));
    CHECK(urban.name == "urban");
    CHECK(urban.entries.size() == 12);
    std::uint64_t total = 0;
    for (const auto& e : urban.entries) total += e.frames;
    CHECK(total == 388230);
    CHECK(urban.entries[0].name == "ApolloScape");
    CHECK(urban.entries[0].frames == 131286);
    CHECK(urban.entries[0].contiguous);

    auto offroad = load_manifestset(fixture("tables/offroad.manifestset"));
    CHECK(offroad.entries.size() == 6);
    std::uint64_t off_total = 0;
    for (const auto& e : offroad.entries) off_total += e.frames;
    CHECK(off_total == 18558);
}

TEST_CASE("percent rounding is half away from zero") {
    CHECK(percent_rounded(1, 2) == 50);
    CHECK(percent_rounded(1, 200) == 1);   // 0.5% rounds up
    CHECK(percent_rounded(1, 201) == 0);
    CHECK(percent_rounded(0, 100) == 0);
    CHECK(percent_rounded(100, 100) == 100);
    CHECK(percent_rounded(5, 0) == 0);

    CHECK(rel_cell(1, 201) == "<1");  // nonzero count must stay visible
    CHECK(rel_cell(0, 201) == "0");
    CHECK(rel_cell(1, 2) == "50");
}

TEST_CASE("a lone dataset owns the whole set") {
    StatsSet set;
    set.entries.push_back({"Only", 123, false});
    std::string text = stats_to_text({set});
    CHECK(text.find("100") != std::string::npos);
}

TEST_CASE("stats text matches the frozen table") {
    auto urban = load_manifestset(fixture("tables/urban.manifestset"));
    auto offroad = load_manifestset(fixture("tables/offroad.manifestset"));
    std::string expected = testutil::read_file(fixture("tables/stats_golden.txt"));
    REQUIRE_FALSE(expected.empty());
    CHECK(stats_to_text({urban, offroad}) == expected);
}

TEST_CASE("stats json mirrors the table contents") {
    auto urban = load_manifestset(fixture("tables/urban.manifestset"));
    std::string json = stats_to_json({urban});
    CHECK(json.find("\"ApolloScape\"") != std::string::npos);
    CHECK(json.find("131286") != std::string::npos);
    CHECK(json.find("388230") != std::string::npos);
}

TEST_CASE("stats entries derive from parsed manifests") {
    auto m = parse_manifest(
        "dataset cam-A taxonomy t contiguous\n"
        "frame a gt a.png\nframe b gt b.png\n");
    StatsEntry e = stats_entry_from_manifest(m);
    CHECK(e.name == "cam-A");
    CHECK(e.frames == 2);
    CHECK(e.contiguous);
}
