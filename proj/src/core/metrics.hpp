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

#include "core/taxonomy.hpp"
#include "core/tensor.hpp"

namespace ontoseg {

/// Row = ground-truth class, column = predicted class, plus one extra
/// "none" column for predicted void on a labeled pixel. Ground-truth void
/// pixels are not scored, only counted as ignored. Accumulation is pure
/// integer arithmetic so shards merge exactly.
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(int class_count);

    void accumulate(const LabelMap& pred, const LabelMap& gt);
    void merge(const ConfusionMatrix& other);

    int class_count() const { return class_count_; }
    /// pred_col in [0, C]; column C is the none column.
    std::uint64_t count(int gt_row, int pred_col) const;
    std::uint64_t ignored() const { return ignored_; }
    std::uint64_t total() const;

    /// TP / (TP + FP + FN); empty when the class appears in neither
    /// ground truth nor prediction.
    std::optional<double> iou(int c) const;

private:
    int class_count_;
    std::vector<std::uint64_t> counts_;
    std::uint64_t ignored_ = 0;
};

struct ClassIou {
    int id = 0;
    std::string name;
    std::optional<double> iou;
};

struct EvalReport {
    std::vector<ClassIou> per_class;
    double miou = 0.0;
    int classes_included = 0;
    double pixel_accuracy = 0.0;
    std::uint64_t pixels_evaluated = 0;
    std::uint64_t pixels_ignored = 0;
};

EvalReport summarize(const ConfusionMatrix& cm, const Taxonomy& taxonomy);

/// Round half away from zero to six decimals; every serialized metric goes
/// through this so the JSON and text views of a report agree exactly.
double round6(double v);

std::string eval_report_to_json(const EvalReport& report);

/// Aligned table; when a baseline mean IoU is given the summary block shows
/// init, post and diff = post - init.
std::string eval_report_to_text(const EvalReport& report, std::optional<double> baseline_miou);

}  // namespace ontoseg
