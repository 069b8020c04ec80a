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

#include "core/taxonomy.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "core/error.hpp"
#include "core/text.hpp"

namespace ontoseg {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw parse_error("line " + std::to_string(line) + ": " + msg);
}

}  // namespace

Taxonomy::Taxonomy(std::string name, std::vector<ClassDef> classes)
    : name_(std::move(name)), classes_(std::move(classes)) {
    if (classes_.empty()) throw validation_error("taxonomy '" + name_ + "' declares no classes");
    std::sort(classes_.begin(), classes_.end(),
              [](const ClassDef& a, const ClassDef& b) { return a.id < b.id; });
    std::unordered_set<std::string> names;
    for (std::size_t i = 0; i < classes_.size(); ++i) {
        const ClassDef& c = classes_[i];
        if (c.id != static_cast<int>(i))
            throw validation_error("taxonomy '" + name_ + "': class ids are not dense 0.." +
                                   std::to_string(classes_.size() - 1) + " (saw id " +
                                   std::to_string(c.id) + " at position " + std::to_string(i) + ")");
        if (!names.insert(c.name).second)
            throw validation_error("taxonomy '" + name_ + "': duplicate class name '" + c.name + "'");
        if (c.is_void) {
            if (void_id_) throw validation_error("taxonomy '" + name_ + "': multiple void classes");
            void_id_ = c.id;
        }
    }
}

const ClassDef& Taxonomy::class_at(int id) const {
    if (id < 0 || id >= class_count())
        throw argument_error("taxonomy '" + name_ + "': class id " + std::to_string(id) +
                             " out of range 0.." + std::to_string(class_count() - 1));
    return classes_[static_cast<std::size_t>(id)];
}

std::optional<int> Taxonomy::find(std::string_view name) const {
    const std::string folded = text::fold_name(name);
    for (const ClassDef& c : classes_)
        if (c.name == folded) return c.id;
    return std::nullopt;
}

Taxonomy parse_taxonomy(std::string_view document) {
    std::string taxonomy_name;
    std::vector<ClassDef> classes;
    std::unordered_set<std::string> seen_names;
    bool header_seen = false;

    int line_no = 0;
    for (std::string_view raw : text::split_lines(document)) {
        ++line_no;
        const std::string_view line = text::trim(text::strip_comment(raw));
        if (line.empty()) continue;
        const auto tokens = text::split_ws(line);

        if (tokens[0] == "taxonomy") {
            if (header_seen) fail(line_no, "duplicate 'taxonomy' header");
            if (tokens.size() != 2) fail(line_no, "expected 'taxonomy <name>'");
            taxonomy_name = std::string(tokens[1]);
            header_seen = true;
            continue;
        }
        if (tokens[0] == "class") {
            if (!header_seen) fail(line_no, "'class' before 'taxonomy' header");
            if (tokens.size() != 6 && tokens.size() != 7)
                fail(line_no, "expected 'class <id> <name> <r> <g> <b> [void]'");
            ClassDef def;
            const auto id = text::parse_int(tokens[1]);
            if (!id || *id < 0 || *id > 254) fail(line_no, "class id must be an integer in 0..254");
            def.id = static_cast<int>(*id);
            if (!text::is_class_name(tokens[2]))
                fail(line_no, "class name '" + std::string(tokens[2]) +
                                  "' must match [a-z0-9_-]+");
            def.name = std::string(tokens[2]);
            if (!seen_names.insert(def.name).second)
                fail(line_no, "duplicate class name '" + def.name + "'");
            std::array<std::uint8_t, 3> rgb{};
            for (int k = 0; k < 3; ++k) {
                const auto v = text::parse_int(tokens[static_cast<std::size_t>(3 + k)]);
                if (!v || *v < 0 || *v > 255) fail(line_no, "color channel must be in 0..255");
                rgb[static_cast<std::size_t>(k)] = static_cast<std::uint8_t>(*v);
            }
            def.color = Rgb{rgb[0], rgb[1], rgb[2]};
            if (tokens.size() == 7) {
                if (tokens[6] != "void") fail(line_no, "trailing token must be 'void'");
                def.is_void = true;
            }
            classes.push_back(std::move(def));
            continue;
        }
        fail(line_no, "unknown directive '" + std::string(tokens[0]) + "'");
    }

    if (!header_seen) throw parse_error("missing 'taxonomy <name>' header");
    if (classes.empty()) throw parse_error("taxonomy '" + taxonomy_name + "' declares no classes");

    // Dense-id and single-void checks live in the constructor, but report
    // them as parse errors here so callers get one error category per file.
    try {
        return Taxonomy(std::move(taxonomy_name), std::move(classes));
    } catch (const Error& e) {
        throw parse_error(e.what());
    }
}

Taxonomy load_taxonomy(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open taxonomy file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_taxonomy(buf.str());
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

std::string serialize_taxonomy(const Taxonomy& taxonomy) {
    std::ostringstream out;
    out << "taxonomy " << taxonomy.name() << "\n";
    for (const ClassDef& c : taxonomy.classes()) {
        out << "class " << c.id << " " << c.name << " " << int(c.color.r) << " " << int(c.color.g)
            << " " << int(c.color.b);
        if (c.is_void) out << " void";
        out << "\n";
    }
    return out.str();
}

}  // namespace ontoseg
