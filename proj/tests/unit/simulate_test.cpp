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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <doctest.h>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/png_io.hpp"
#include "tmpdir.hpp"

using namespace ontoseg;

namespace {

std::string fixture(const char* rel) {
    return std::string(ONTOSEG_FIXTURE_DIR) + "/" + rel;
}

struct Ground {
    Taxonomy fine;
    Taxonomy coarse;
    OntologyRelation rel;
};

Ground ground() {
    Taxonomy fine = load_taxonomy(fixture("sim/ground_fine.tax"));
    Taxonomy coarse = load_taxonomy(fixture("sim/ground_coarse.tax"));
    OntologyRelation rel =
        load_ontology(fixture("sim/ground_coarse_to_fine.ont"), coarse, fine);
    return {std::move(fine), std::move(coarse), std::move(rel)};
}

// Connected components of equal labels under 8-connectivity.
int component_count(const LabelMap& map) {
    std::vector<char> seen(map.pixel_count(), 0);
    std::vector<std::size_t> stack;
    int components = 0;
    for (std::size_t start = 0; start < map.ids.size(); ++start) {
        if (seen[start]) continue;
        ++components;
        stack.push_back(start);
        seen[start] = 1;
        while (!stack.empty()) {
            std::size_t p = stack.back();
            stack.pop_back();
            int y = static_cast<int>(p) / map.width;
            int x = static_cast<int>(p) % map.width;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    if (dy == 0 && dx == 0) continue;
                    int ny = y + dy, nx = x + dx;
                    if (ny < 0 || nx < 0 || ny >= map.height || nx >= map.width) continue;
                    std::size_t q = map.index(ny, nx);
                    if (!seen[q] && map.ids[q] == map.ids[p]) {
                        seen[q] = 1;
                        stack.push_back(q);
                    }
                }
        }
    }
    return components;
}

}  // namespace

TEST_CASE("a single cell paints the whole scene with one class") {
    auto g = ground();
    SceneSpec spec;
    spec.height = 16;
    spec.width = 16;
    spec.num_cells = 1;
    spec.seed = 3;
    LabelMap scene = generate_scene(spec, g.fine);
    for (std::uint8_t id : scene.ids) CHECK(id == scene.ids[0]);
    CHECK(scene.ids[0] < g.fine.class_count());
}

TEST_CASE("scene generation is deterministic in the seed") {
    auto g = ground();
    SceneSpec spec;
    spec.seed = 42;
    LabelMap a = generate_scene(spec, g.fine);
    LabelMap b = generate_scene(spec, g.fine);
    CHECK(a.ids == b.ids);
    spec.seed = 43;
    LabelMap c = generate_scene(spec, g.fine);
    CHECK(a.ids != c.ids);
}

TEST_CASE("scenes have at most one region per cell") {
    auto g = ground();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        SceneSpec spec;
        spec.height = 64;
        spec.width = 64;
        spec.num_cells = 12;
        spec.seed = seed;
        LabelMap scene = generate_scene(spec, g.fine);
        CHECK(component_count(scene) <= 12);
    }
}

TEST_CASE("scene validation rejects degenerate requests") {
    auto g = ground();
    SceneSpec tiny;
    tiny.height = 4;
    CHECK_THROWS_AS(generate_scene(tiny, g.fine), Error);
    SceneSpec empty;
    empty.num_cells = 0;
    CHECK_THROWS_AS(generate_scene(empty, g.fine), Error);
}

TEST_CASE("coarsening follows the partition and passes void through") {
    auto g = ground();
    LabelMap fine_map;
    fine_map.height = 1;
    fine_map.width = 5;
    fine_map.ids = {static_cast<std::uint8_t>(*g.fine.find("asphalt")),
                    static_cast<std::uint8_t>(*g.fine.find("high-grass")),
                    static_cast<std::uint8_t>(*g.fine.find("soil")),
                    static_cast<std::uint8_t>(*g.fine.find("water")), 255};
    LabelMap coarse_map = coarsen(fine_map, g.rel);
    CHECK(coarse_map.ids[0] == *g.coarse.find("road"));
    CHECK(coarse_map.ids[1] == *g.coarse.find("nature"));
    CHECK(coarse_map.ids[2] == *g.coarse.find("terrain"));
    CHECK(coarse_map.ids[3] == *g.coarse.find("water"));
    CHECK(coarse_map.ids[4] == kVoidLabel);

    // Membership: the coarse label's allowed set always contains the fine one.
    auto table = build_constraint_table(g.rel, g.coarse, g.fine);
    SceneSpec spec;
    spec.seed = 9;
    LabelMap scene = generate_scene(spec, g.fine);
    LabelMap coarse_scene = coarsen(scene, g.rel);
    for (std::size_t i = 0; i < scene.ids.size(); ++i)
        CHECK(table.row_for(coarse_scene.ids[i]).test(scene.ids[i]));
}

TEST_CASE("coarsening refuses non-partition relations") {
    auto g = ground();
    LabelMap any;
    any.height = any.width = 1;
    any.ids = {0};

    OntologyRelation overlap = g.rel;
    overlap.entries[static_cast<std::size_t>(*g.coarse.find("terrain"))].set(
        *g.fine.find("water"));  // water now owned by terrain and water
    CHECK_THROWS_AS(coarsen(any, overlap), Error);

    OntologyRelation gap = g.rel;
    gap.entries[static_cast<std::size_t>(*g.coarse.find("water"))].reset(*g.fine.find("water"));
    CHECK_THROWS_AS(coarsen(any, gap), Error);
}

TEST_CASE("a sharp noiseless teacher concentrates mass on the truth") {
    auto g = ground();
    SceneSpec spec;
    spec.height = 16;
    spec.width = 16;
    spec.seed = 5;
    LabelMap scene = generate_scene(spec, g.fine);
    TeacherNoise noise;
    noise.sharpness = 50.0;
    SoftPrediction soft = simulate_teacher(scene, noise, g.fine.class_count());
    for (std::size_t p = 0; p < scene.ids.size(); ++p) {
        int y = static_cast<int>(p) / scene.width;
        int x = static_cast<int>(p) % scene.width;
        CHECK(soft.at(y, x, scene.ids[p]) > 0.999f);
    }
}

TEST_CASE("a flat teacher emits the uniform distribution") {
    auto g = ground();
    LabelMap scene;
    scene.height = scene.width = 8;
    scene.ids.assign(64, 2);
    TeacherNoise noise;
    noise.sharpness = 0.0;
    SoftPrediction soft = simulate_teacher(scene, noise, g.fine.class_count());
    const float uniform = 1.0f / g.fine.class_count();
    for (float s : soft.scores) CHECK(s == doctest::Approx(uniform).epsilon(1e-6));
}

TEST_CASE("a dominant confusion flips the argmax off the truth") {
    auto g = ground();
    const int asphalt = *g.fine.find("asphalt");
    const int cobble = *g.fine.find("cobble");
    LabelMap scene;
    scene.height = scene.width = 4;
    scene.ids.assign(16, static_cast<std::uint8_t>(asphalt));
    TeacherNoise noise;
    noise.sharpness = 2.0;
    noise.confusions = {{asphalt, cobble, 3.0}};
    SoftPrediction soft = simulate_teacher(scene, noise, g.fine.class_count());
    for (std::size_t p = 0; p < scene.ids.size(); ++p) {
        int y = static_cast<int>(p) / 4, x = static_cast<int>(p) % 4;
        float best = soft.at(y, x, 0);
        int arg = 0;
        for (int c = 1; c < soft.channels; ++c)
            if (soft.at(y, x, c) > best) {
                best = soft.at(y, x, c);
                arg = c;
            }
        CHECK(arg == cobble);
        double sum = 0.0;
        for (int c = 0; c < soft.channels; ++c) sum += soft.at(y, x, c);
        CHECK(std::abs(sum - 1.0) < 1e-5);
    }
}

TEST_CASE("teacher noise draws are reproducible") {
    auto g = ground();
    SceneSpec spec;
    spec.seed = 6;
    LabelMap scene = generate_scene(spec, g.fine);
    TeacherNoise noise;
    noise.sigma = 1.5;
    noise.seed = 77;
    SoftPrediction a = simulate_teacher(scene, noise, g.fine.class_count());
    SoftPrediction b = simulate_teacher(scene, noise, g.fine.class_count());
    CHECK(a.scores == b.scores);
    noise.seed = 78;
    SoftPrediction c = simulate_teacher(scene, noise, g.fine.class_count());
    CHECK(a.scores != c.scores);
}

TEST_CASE("teacher parameters are validated") {
    auto g = ground();
    LabelMap scene;
    scene.height = scene.width = 8;
    scene.ids.assign(64, 0);
    TeacherNoise bad;
    bad.sharpness = -1.0;
    CHECK_THROWS_AS(simulate_teacher(scene, bad, g.fine.class_count()), Error);
    bad = TeacherNoise{};
    bad.sigma = -0.5;
    CHECK_THROWS_AS(simulate_teacher(scene, bad, g.fine.class_count()), Error);
    bad = TeacherNoise{};
    bad.confusions = {{0, 99, 1.0}};
    CHECK_THROWS_AS(simulate_teacher(scene, bad, g.fine.class_count()), Error);
}

TEST_CASE("a perfect teacher needs no repair") {
    auto g = ground();
    SceneSpec spec;
    spec.height = 32;
    spec.width = 32;
    spec.num_cells = 6;
    spec.seed = 11;
    TeacherNoise noise;
    noise.sharpness = 10.0;
    ExperimentResult res =
        run_experiment(spec, noise, g.fine, g.coarse, g.rel, RefineConfig{}, 3);
    CHECK(res.report.trials == 3);
    for (const TrialResult& t : res.report.per_trial) {
        CHECK(t.accuracy_unconstrained == 1.0);
        CHECK(t.accuracy_constrained == 1.0);
        CHECK(t.fixed_by_constraint == 0);
        CHECK(t.introduced_by_constraint == 0);
    }
    CHECK(res.report.mean_accuracy_constrained == 1.0);
    CHECK(res.report.eval_constrained.miou == 1.0);
}

TEST_CASE("trial seeds advance from the base seed") {
    auto g = ground();
    SceneSpec spec;
    spec.height = 16;
    spec.width = 16;
    spec.seed = 40;
    ExperimentResult res =
        run_experiment(spec, TeacherNoise{}, g.fine, g.coarse, g.rel, RefineConfig{}, 4);
    REQUIRE(res.report.per_trial.size() == 4);
    for (int i = 0; i < 4; ++i)
        CHECK(res.report.per_trial[static_cast<std::size_t>(i)].trial_seed ==
              spec.seed + static_cast<std::uint64_t>(i));
}

TEST_CASE("masking repairs every cross-boundary confusion when noise is off") {
    auto g = ground();
    const int asphalt = *g.fine.find("asphalt");
    const int high_grass = *g.fine.find("high-grass");
    SceneSpec spec;
    spec.height = 48;
    spec.width = 48;
    spec.num_cells = 10;
    spec.seed = 21;
    TeacherNoise noise;
    noise.sharpness = 2.0;
    noise.confusions = {{asphalt, high_grass, 3.0}};  // stronger than the truth

    ExperimentResult res =
        run_experiment(spec, noise, g.fine, g.coarse, g.rel, RefineConfig{}, 5);
    std::int64_t confused = 0;
    for (const TrialResult& t : res.report.per_trial) {
        confused += t.confused_pixels;
        // Unconstrained, the stronger wrong logit wins everywhere.
        CHECK(t.confused_correct_unconstrained == 0);
        // The road row forbids high-grass, so the truth wins back every pixel.
        CHECK(t.confused_correct_constrained == t.confused_pixels);
        CHECK(t.introduced_by_constraint == 0);
        CHECK(t.accuracy_constrained >= t.accuracy_unconstrained);
    }
    CHECK(confused > 0);
    CHECK(res.report.confused_pixels == confused);
    CHECK(res.report.total_introduced == 0);
}

TEST_CASE("masking cannot repair confusion within one coarse class") {
    auto g = ground();
    const int asphalt = *g.fine.find("asphalt");
    const int cobble = *g.fine.find("cobble");  // same road row
    SceneSpec spec;
    spec.height = 48;
    spec.width = 48;
    spec.num_cells = 10;
    spec.seed = 22;
    TeacherNoise noise;
    noise.sharpness = 2.0;
    noise.confusions = {{asphalt, cobble, 3.0}};

    ExperimentResult res =
        run_experiment(spec, noise, g.fine, g.coarse, g.rel, RefineConfig{}, 5);
    for (const TrialResult& t : res.report.per_trial) {
        CHECK(t.confused_correct_unconstrained == 0);
        CHECK(t.confused_correct_constrained == 0);  // cobble stays allowed
        CHECK(t.accuracy_constrained == t.accuracy_unconstrained);
        CHECK(t.fixed_by_constraint == 0);
        CHECK(t.introduced_by_constraint == 0);
    }
}

TEST_CASE("experiment reports serialize deterministically") {
    auto g = ground();
    SceneSpec spec;
    spec.height = 24;
    spec.width = 24;
    spec.seed = 30;
    TeacherNoise noise;
    noise.sharpness = 2.0;
    noise.sigma = 1.0;
    noise.confusions = {{*g.fine.find("asphalt"), *g.fine.find("high-grass"), 3.0}};

    ExperimentResult a = run_experiment(spec, noise, g.fine, g.coarse, g.rel, RefineConfig{}, 2);
    ExperimentResult b = run_experiment(spec, noise, g.fine, g.coarse, g.rel, RefineConfig{}, 2);
    std::string ja = experiment_report_to_json(a.report, g.fine);
    std::string jb = experiment_report_to_json(b.report, g.fine);
    CHECK(ja == jb);

    auto doc = nlohmann::json::parse(ja);
    CHECK(doc["schema"] == 1);
    CHECK(doc["trials"] == 2);
    CHECK(doc["scene"]["height"] == 24);
    CHECK(doc["teacher"]["sharpness"] == 2.0);
    REQUIRE(doc["teacher"]["confusions"].size() == 1);
    CHECK(doc["teacher"]["confusions"][0]["from"] == "asphalt");
    CHECK(doc["teacher"]["confusions"][0]["to"] == "high-grass");
    CHECK(doc["per_trial"].size() == 2);
    CHECK(doc["eval_constrained"].contains("miou"));
    CHECK(doc["eval_unconstrained"]["classes"].size() == 8);
}

TEST_CASE("the triptych renders three palette panels") {
    testutil::TmpDir dir;
    auto g = ground();
    SceneSpec spec;
    spec.height = 16;
    spec.width = 16;
    spec.seed = 2;
    ExperimentResult res =
        run_experiment(spec, TeacherNoise{}, g.fine, g.coarse, g.rel, RefineConfig{}, 1);
    std::string path = dir.str("trip.png");
    write_triptych(res.last_fine, res.last_unconstrained, res.last_constrained, g.fine, path);
    png_io::Rgb8 img = png_io::read_rgb8(path);
    CHECK(img.height == 16);
    CHECK(img.width == 16 * 3 + 8);
    // First panel, first pixel carries the fine truth's palette color.
    Rgb expected = g.fine.class_at(res.last_fine.ids[0]).color;
    CHECK(img.pixels[0] == expected.r);
    CHECK(img.pixels[1] == expected.g);
    CHECK(img.pixels[2] == expected.b);
}
