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

#include "core/metrics.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include <nlohmann/json.hpp>

#include "core/error.hpp"
#include "core/rng.hpp"
#include "gen.hpp"
#include "oracle.hpp"

using namespace ontoseg;

namespace {

LabelMap map_of(int h, int w, std::vector<std::uint8_t> ids) {
    LabelMap m;
    m.height = h;
    m.width = w;
    m.ids = std::move(ids);
    return m;
}

Taxonomy small_tax(int n) {
    std::string doc = "taxonomy t\n";
    for (int i = 0; i < n; ++i)
        doc += "class " + std::to_string(i) + " c" + std::to_string(i) + " 0 0 0\n";
    return parse_taxonomy(doc);
}

}  // namespace

TEST_CASE("identical maps score a perfect mean IoU") {
    SplitMix64 rng(200);
    LabelMap gt = gen::labels(rng, 8, 8, 5);
    ConfusionMatrix cm(5);
    cm.accumulate(gt, gt);
    EvalReport report = summarize(cm, small_tax(5));
    CHECK(report.miou == 1.0);
    CHECK(report.pixel_accuracy == 1.0);
    for (const auto& c : report.per_class)
        if (c.iou) CHECK(*c.iou == 1.0);
}

TEST_CASE("diagonal counts land on the diagonal") {
    LabelMap gt = map_of(1, 4, {0, 1, 2, 255});
    LabelMap pred = map_of(1, 4, {0, 1, 2, 2});
    ConfusionMatrix cm(3);
    cm.accumulate(pred, gt);
    CHECK(cm.count(0, 0) == 1);
    CHECK(cm.count(1, 1) == 1);
    CHECK(cm.count(2, 2) == 1);
    CHECK(cm.ignored() == 1);  // gt void is never scored
    CHECK(cm.total() == 4);   // scored plus ignored
}

TEST_CASE("predicted void on a labeled pixel fills the none column") {
    LabelMap gt = map_of(1, 3, {0, 1, 1});
    LabelMap pred = map_of(1, 3, {255, 1, 1});
    ConfusionMatrix cm(2);
    cm.accumulate(pred, gt);
    CHECK(cm.count(0, 2) == 1);  // none column index = class_count
    CHECK(cm.count(0, 0) == 0);
    // The void prediction counts as a false negative for class 0.
    auto iou0 = cm.iou(0);
    REQUIRE(iou0.has_value());
    CHECK(*iou0 == 0.0);
}

TEST_CASE("a single confusion computes the textbook IoU") {
    // class 0: TP=6, FP=2, FN=4 -> IoU = 6 / 12 = 0.5
    std::vector<std::uint8_t> gt_ids, pred_ids;
    for (int i = 0; i < 6; ++i) {
        gt_ids.push_back(0);
        pred_ids.push_back(0);
    }
    for (int i = 0; i < 4; ++i) {
        gt_ids.push_back(0);
        pred_ids.push_back(1);
    }
    for (int i = 0; i < 2; ++i) {
        gt_ids.push_back(1);
        pred_ids.push_back(0);
    }
    ConfusionMatrix cm(2);
    cm.accumulate(map_of(1, 12, pred_ids), map_of(1, 12, gt_ids));
    auto iou0 = cm.iou(0);
    REQUIRE(iou0.has_value());
    CHECK(*iou0 == 0.5);
}

TEST_CASE("absent classes are excluded from the mean") {
    LabelMap gt = map_of(1, 4, {0, 0, 1, 1});
    LabelMap pred = map_of(1, 4, {0, 0, 1, 1});
    ConfusionMatrix cm(4);  // classes 2 and 3 never appear
    cm.accumulate(pred, gt);
    EvalReport report = summarize(cm, small_tax(4));
    CHECK(report.classes_included == 2);
    CHECK(report.miou == 1.0);
    CHECK_FALSE(report.per_class[2].iou.has_value());
    CHECK_FALSE(report.per_class[3].iou.has_value());
}

TEST_CASE("an all-void prediction scores zero where ground truth exists") {
    LabelMap gt = map_of(1, 4, {0, 0, 1, 1});
    LabelMap pred = map_of(1, 4, {255, 255, 255, 255});
    ConfusionMatrix cm(2);
    cm.accumulate(pred, gt);
    EvalReport report = summarize(cm, small_tax(2));
    CHECK(report.miou == 0.0);
    CHECK(report.pixel_accuracy == 0.0);
    CHECK(report.classes_included == 2);
}

TEST_CASE("matches the set-based reference on random label maps") {
    SplitMix64 rng(201);
    for (int trial = 0; trial < 100; ++trial) {
        const int classes = 5;
        LabelMap gt = gen::labels(rng, 8, 8, classes, 15);
        LabelMap pred = gen::labels(rng, 8, 8, classes, 5);
        ConfusionMatrix cm(classes);
        cm.accumulate(pred, gt);
        double sum = 0.0;
        int included = 0;
        for (int c = 0; c < classes; ++c) {
            auto lib = cm.iou(c);
            auto ref = oracle::iou_class(pred.ids, gt.ids, c);
            CHECK(lib.has_value() == ref.has_value());
            if (lib && ref) {
                CHECK(*lib == doctest::Approx(*ref).epsilon(1e-12));
                sum += *ref;
                ++included;
            }
        }
        EvalReport report = summarize(cm, small_tax(classes));
        CHECK(report.classes_included == included);
        if (included > 0) CHECK(report.miou == doctest::Approx(sum / included).epsilon(1e-12));
    }
}

TEST_CASE("IoU is symmetric in prediction and ground truth without void") {
    SplitMix64 rng(202);
    for (int trial = 0; trial < 20; ++trial) {
        LabelMap a = gen::labels(rng, 6, 6, 4, 0);
        LabelMap b = gen::labels(rng, 6, 6, 4, 0);
        ConfusionMatrix ab(4), ba(4);
        ab.accumulate(a, b);
        ba.accumulate(b, a);
        for (int c = 0; c < 4; ++c) {
            auto x = ab.iou(c);
            auto y = ba.iou(c);
            CHECK(x.has_value() == y.has_value());
            if (x && y) CHECK(*x == *y);
        }
    }
}

TEST_CASE("sharded accumulation merges exactly") {
    SplitMix64 rng(203);
    const int classes = 6;
    std::vector<LabelMap> gts, preds;
    for (int i = 0; i < 9; ++i) {
        gts.push_back(gen::labels(rng, 5, 7, classes));
        preds.push_back(gen::labels(rng, 5, 7, classes));
    }

    ConfusionMatrix whole(classes);
    for (int i = 0; i < 9; ++i) whole.accumulate(preds[i], gts[i]);

    // Shard three ways, then merge in a different order.
    ConfusionMatrix s0(classes), s1(classes), s2(classes);
    for (int i = 0; i < 9; ++i) {
        ConfusionMatrix* shard = i % 3 == 0 ? &s0 : (i % 3 == 1 ? &s1 : &s2);
        shard->accumulate(preds[i], gts[i]);
    }
    ConfusionMatrix merged(classes);
    merged.merge(s2);
    merged.merge(s0);
    merged.merge(s1);

    for (int g = 0; g < classes; ++g)
        for (int p = 0; p <= classes; ++p) CHECK(merged.count(g, p) == whole.count(g, p));
    CHECK(merged.ignored() == whole.ignored());
    EvalReport a = summarize(merged, small_tax(classes));
    EvalReport b = summarize(whole, small_tax(classes));
    CHECK(a.miou == b.miou);
}

TEST_CASE("mismatched shapes and widths are rejected") {
    ConfusionMatrix cm(3);
    CHECK_THROWS_AS(cm.accumulate(map_of(1, 2, {0, 1}), map_of(2, 1, {0, 1})), Error);
    ConfusionMatrix other(4);
    CHECK_THROWS_AS(cm.merge(other), Error);
    LabelMap bad = map_of(1, 1, {7});  // id outside the matrix
    CHECK_THROWS_AS(cm.accumulate(bad, map_of(1, 1, {0})), Error);
}

TEST_CASE("round6 rounds half away from zero at six decimals") {
    CHECK(round6(0.1234564) == 0.123456);
    CHECK(round6(0.1234565) == 0.123457);
    CHECK(round6(-0.1234565) == -0.123457);
    CHECK(round6(1.0) == 1.0);
    CHECK(round6(2.0 / 3.0) == 0.666667);
}

TEST_CASE("JSON and text views round identically") {
    SplitMix64 rng(204);
    LabelMap gt = gen::labels(rng, 16, 16, 5);
    LabelMap pred = gen::labels(rng, 16, 16, 5);
    ConfusionMatrix cm(5);
    cm.accumulate(pred, gt);
    EvalReport report = summarize(cm, small_tax(5));

    auto doc = nlohmann::json::parse(eval_report_to_json(report));
    CHECK(doc["miou"].get<double>() == round6(report.miou));
    CHECK(doc["classes_included"].get<int>() == report.classes_included);
    CHECK(doc["pixel_accuracy"].get<double>() == round6(report.pixel_accuracy));
    REQUIRE(doc["classes"].size() == 5);
    for (int c = 0; c < 5; ++c) {
        const auto& entry = doc["classes"][static_cast<std::size_t>(c)];
        CHECK(entry["id"].get<int>() == c);
        CHECK(entry["name"].get<std::string>() == "c" + std::to_string(c));
        if (report.per_class[static_cast<std::size_t>(c)].iou)
            CHECK(entry["iou"].get<double>() ==
                  round6(*report.per_class[static_cast<std::size_t>(c)].iou));
        else
            CHECK(entry["iou"].is_null());
    }

    // The text table prints the same six-decimal numbers.
    std::string text = eval_report_to_text(report, std::nullopt);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", round6(report.miou));
    CHECK(text.find(buf) != std::string::npos);
}

TEST_CASE("baseline comparison reports post minus init") {
    SplitMix64 rng(205);
    LabelMap gt = gen::labels(rng, 8, 8, 3);
    ConfusionMatrix cm(3);
    cm.accumulate(gt, gt);
    EvalReport report = summarize(cm, small_tax(3));  // miou = 1.0
    std::string text = eval_report_to_text(report, 0.75);
    CHECK(text.find("0.750000") != std::string::npos);   // init
    CHECK(text.find("1.000000") != std::string::npos);   // post
    CHECK(text.find("+0.250000") != std::string::npos);  // diff
}
