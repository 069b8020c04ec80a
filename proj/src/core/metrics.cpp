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

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/error.hpp"

namespace ontoseg {
namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", round6(v));
    return buf;
}

}  // namespace

ConfusionMatrix::ConfusionMatrix(int class_count) : class_count_(class_count) {
    if (class_count < 1 || class_count > 255)
        throw argument_error("confusion matrix needs 1..255 classes, got " +
                             std::to_string(class_count));
    counts_.assign(static_cast<std::size_t>(class_count) * (class_count + 1), 0);
}

void ConfusionMatrix::accumulate(const LabelMap& pred, const LabelMap& gt) {
    if (pred.height != gt.height || pred.width != gt.width)
        throw argument_error("accumulate: prediction is " + std::to_string(pred.height) + "x" +
                             std::to_string(pred.width) + " but ground truth is " +
                             std::to_string(gt.height) + "x" + std::to_string(gt.width));
    const int cols = class_count_ + 1;
    for (std::size_t i = 0; i < gt.ids.size(); ++i) {
        std::uint8_t g = gt.ids[i];
        if (g == kVoidLabel) {
            ++ignored_;
            continue;
        }
        if (g >= class_count_)
            throw argument_error("accumulate: ground-truth id " + std::to_string(g) +
                                 " outside taxonomy");
        std::uint8_t p = pred.ids[i];
        int col;
        if (p == kVoidLabel) {
            col = class_count_;
        } else if (p >= class_count_) {
            throw argument_error("accumulate: predicted id " + std::to_string(p) +
                                 " outside taxonomy");
        } else {
            col = p;
        }
        ++counts_[static_cast<std::size_t>(g) * cols + col];
    }
}

void ConfusionMatrix::merge(const ConfusionMatrix& other) {
    if (other.class_count_ != class_count_)
        throw argument_error("merge: class counts differ");
    for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
    ignored_ += other.ignored_;
}

std::uint64_t ConfusionMatrix::count(int gt_row, int pred_col) const {
    if (gt_row < 0 || gt_row >= class_count_ || pred_col < 0 || pred_col > class_count_)
        throw argument_error("confusion matrix index out of range");
    return counts_[static_cast<std::size_t>(gt_row) * (class_count_ + 1) + pred_col];
}

std::uint64_t ConfusionMatrix::total() const {
    std::uint64_t sum = ignored_;
    for (std::uint64_t v : counts_) sum += v;
    return sum;
}

std::optional<double> ConfusionMatrix::iou(int c) const {
    if (c < 0 || c >= class_count_)
        throw argument_error("iou: unknown class id " + std::to_string(c));
    const int cols = class_count_ + 1;
    std::uint64_t tp = counts_[static_cast<std::size_t>(c) * cols + c];
    std::uint64_t row = 0;
    for (int j = 0; j < cols; ++j) row += counts_[static_cast<std::size_t>(c) * cols + j];
    std::uint64_t col = 0;
    for (int i = 0; i < class_count_; ++i) col += counts_[static_cast<std::size_t>(i) * cols + c];
    std::uint64_t denom = row + col - tp;  // TP + FP + FN
    if (denom == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(denom);
}

EvalReport summarize(const ConfusionMatrix& cm, const Taxonomy& taxonomy) {
    if (taxonomy.class_count() != cm.class_count())
        throw argument_error("summarize: taxonomy has " + std::to_string(taxonomy.class_count()) +
                             " classes but matrix covers " + std::to_string(cm.class_count()));
    EvalReport rep;
    double sum = 0.0;
    for (int c = 0; c < cm.class_count(); ++c) {
        ClassIou entry;
        entry.id = c;
        entry.name = taxonomy.class_at(c).name;
        entry.iou = cm.iou(c);
        if (entry.iou) {
            sum += *entry.iou;
            ++rep.classes_included;
        }
        rep.per_class.push_back(std::move(entry));
    }
    rep.miou = rep.classes_included > 0 ? sum / rep.classes_included : 0.0;
    std::uint64_t correct = 0;
    for (int c = 0; c < cm.class_count(); ++c) correct += cm.count(c, c);
    rep.pixels_ignored = cm.ignored();
    rep.pixels_evaluated = cm.total() - cm.ignored();
    rep.pixel_accuracy = rep.pixels_evaluated > 0
                             ? static_cast<double>(correct) / static_cast<double>(rep.pixels_evaluated)
                             : 0.0;
    return rep;
}

double round6(double v) {
    double scaled = v * 1e6;
    double r = std::floor(std::abs(scaled) + 0.5);
    return std::copysign(r, scaled) / 1e6;
}

std::string eval_report_to_json(const EvalReport& report) {
    nlohmann::json doc;
    doc["schema"] = 1;
    nlohmann::json classes = nlohmann::json::array();
    for (const ClassIou& c : report.per_class) {
        nlohmann::json entry;
        entry["id"] = c.id;
        entry["name"] = c.name;
        if (c.iou)
            entry["iou"] = round6(*c.iou);
        else
            entry["iou"] = nullptr;
        classes.push_back(std::move(entry));
    }
    doc["classes"] = std::move(classes);
    doc["miou"] = round6(report.miou);
    doc["classes_included"] = report.classes_included;
    doc["pixel_accuracy"] = round6(report.pixel_accuracy);
    doc["pixels_evaluated"] = report.pixels_evaluated;
    doc["pixels_ignored"] = report.pixels_ignored;
    return doc.dump(2) + "\n";
}

std::string eval_report_to_text(const EvalReport& report, std::optional<double> baseline_miou) {
    std::size_t name_w = 14;
    for (const ClassIou& c : report.per_class) name_w = std::max(name_w, c.name.size());
    std::ostringstream os;
    os << "class";
    os << std::string(name_w - 5 + 2, ' ') << "     iou\n";
    for (const ClassIou& c : report.per_class) {
        os << c.name << std::string(name_w - c.name.size() + 2, ' ');
        if (c.iou)
            os << fixed6(*c.iou) << "\n";
        else
            os << "  absent\n";
    }
    os << "\n";
    if (baseline_miou) {
        double init = round6(*baseline_miou);
        double post = round6(report.miou);
        char diff[64];
        std::snprintf(diff, sizeof(diff), "%+.6f", round6(post - init));
        os << "miou init  " << fixed6(init) << "\n";
        os << "miou post  " << fixed6(post) << "  (" << report.classes_included
           << " classes)\n";
        os << "miou diff  " << diff << "\n";
    } else {
        os << "miou            " << fixed6(report.miou) << "  (" << report.classes_included
           << " classes)\n";
    }
    os << "pixel accuracy  " << fixed6(report.pixel_accuracy) << "\n";
    os << "pixels          " << report.pixels_evaluated << " evaluated, " << report.pixels_ignored
       << " ignored\n";
    return os.str();
}

}  // namespace ontoseg
