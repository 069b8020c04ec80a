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

#include "core/ontology.hpp"

#include <algorithm>
#include <bit>
#include <fstream>
#include <sstream>

#include "core/error.hpp"
#include "core/text.hpp"

namespace ontoseg {

int ClassSet::count() const {
    int n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
}

bool ClassSet::none() const {
    for (std::uint64_t w : words_)
        if (w != 0) return false;
    return true;
}

ClassSet& ClassSet::operator|=(const ClassSet& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
    return *this;
}

ClassSet& ClassSet::operator-=(const ClassSet& other) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~other.words_[i];
    return *this;
}

std::vector<int> ClassSet::to_ids() const {
    std::vector<int> ids;
    for (int i = 0; i < width_; ++i)
        if (test(i)) ids.push_back(i);
    return ids;
}

std::string_view fallback_name(FallbackPolicy policy) {
    switch (policy) {
        case FallbackPolicy::Error: return "error";
        case FallbackPolicy::Void: return "void";
        case FallbackPolicy::UnconstrainedArgmax: return "unconstrained";
    }
    return "void";
}

std::optional<FallbackPolicy> fallback_from_name(std::string_view name) {
    if (name == "error") return FallbackPolicy::Error;
    if (name == "void") return FallbackPolicy::Void;
    if (name == "unconstrained") return FallbackPolicy::UnconstrainedArgmax;
    return std::nullopt;
}

int error_count(const Diagnostics& diagnostics) {
    return static_cast<int>(
        std::count_if(diagnostics.begin(), diagnostics.end(),
                      [](const Diagnostic& d) { return d.severity == Severity::error; }));
}

int warning_count(const Diagnostics& diagnostics) {
    return static_cast<int>(diagnostics.size()) - error_count(diagnostics);
}

std::string format_diagnostics(const Diagnostics& diagnostics) {
    std::ostringstream out;
    for (const Diagnostic& d : diagnostics) {
        out << (d.severity == Severity::error ? "error" : "warning") << " " << d.code << " "
            << d.subject << " \"" << d.message << "\"\n";
    }
    return out.str();
}

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw parse_error("line " + std::to_string(line) + ": " + msg);
}

int resolve_class(int line, std::string_view name, const Taxonomy& taxonomy) {
    const auto id = taxonomy.find(name);
    if (!id)
        fail(line, "unknown class '" + std::string(name) + "' in taxonomy '" + taxonomy.name() +
                       "'");
    return *id;
}

// "a, b ,c" -> trimmed non-empty pieces; empty pieces are grammar errors.
std::vector<std::string_view> split_class_list(int line, std::string_view rhs) {
    std::vector<std::string_view> names;
    for (std::string_view piece : text::split_on(rhs, ',')) {
        piece = text::trim(piece);
        if (piece.empty()) fail(line, "empty class name in list");
        names.push_back(piece);
    }
    return names;
}

}  // namespace

OntologyRelation parse_ontology(std::string_view document, const Taxonomy& extra,
                                const Taxonomy& source) {
    OntologyRelation rel;
    rel.extra_class_count = extra.class_count();
    rel.source_class_count = source.class_count();
    rel.entries.assign(static_cast<std::size_t>(extra.class_count()),
                       ClassSet(source.class_count()));
    rel.excluded_source = ClassSet(source.class_count());

    bool header_seen = false;
    bool fallback_seen = false;

    int line_no = 0;
    for (std::string_view raw : text::split_lines(document)) {
        ++line_no;
        const std::string_view line = text::trim(text::strip_comment(raw));
        if (line.empty()) continue;
        const auto tokens = text::split_ws(line);

        if (tokens[0] == "ontology") {
            if (header_seen) fail(line_no, "duplicate 'ontology' header");
            if (tokens.size() != 4 || tokens[2] != "->")
                fail(line_no, "expected 'ontology <extra> -> <source>'");
            if (text::fold_name(tokens[1]) != text::fold_name(extra.name()))
                fail(line_no, "header names extra taxonomy '" + std::string(tokens[1]) +
                                  "' but '" + extra.name() + "' was supplied");
            if (text::fold_name(tokens[3]) != text::fold_name(source.name()))
                fail(line_no, "header names source taxonomy '" + std::string(tokens[3]) +
                                  "' but '" + source.name() + "' was supplied");
            rel.extra_taxonomy = extra.name();
            rel.source_taxonomy = source.name();
            header_seen = true;
            continue;
        }
        if (!header_seen) fail(line_no, "'" + std::string(tokens[0]) + "' before 'ontology' header");

        if (tokens[0] == "map") {
            const auto arrow = line.find("->");
            if (arrow == std::string_view::npos) fail(line_no, "'map' line is missing '->'");
            const std::string_view lhs = text::trim(line.substr(3, arrow - 3));
            const std::string_view rhs = text::trim(line.substr(arrow + 2));
            if (lhs.empty()) fail(line_no, "'map' line is missing the extra class name");
            if (rhs.empty()) fail(line_no, "'map' line needs at least one source class");

            ClassSet targets(source.class_count());
            for (std::string_view name : split_class_list(line_no, rhs))
                targets.set(resolve_class(line_no, name, source));

            // The token 'void' targets the void row when the extra taxonomy
            // has no class of that name; so does the declared void class.
            const auto lhs_id = extra.find(lhs);
            const bool is_void_row =
                (lhs_id && extra.void_id() && *lhs_id == *extra.void_id()) ||
                (!lhs_id && text::fold_name(lhs) == "void");
            if (is_void_row) {
                if (!rel.void_entry) rel.void_entry = ClassSet(source.class_count());
                *rel.void_entry |= targets;
            } else if (lhs_id) {
                rel.entries[static_cast<std::size_t>(*lhs_id)] |= targets;
            } else {
                fail(line_no, "unknown class '" + std::string(lhs) + "' in taxonomy '" +
                                  extra.name() + "'");
            }
            continue;
        }
        if (tokens[0] == "exclude") {
            if (tokens.size() != 2) fail(line_no, "expected 'exclude <source-class-name>'");
            rel.excluded_source.set(resolve_class(line_no, tokens[1], source));
            continue;
        }
        if (tokens[0] == "fallback") {
            if (tokens.size() != 2) fail(line_no, "expected 'fallback <error|void|unconstrained>'");
            if (fallback_seen) fail(line_no, "duplicate 'fallback' declaration");
            const auto policy = fallback_from_name(tokens[1]);
            if (!policy) fail(line_no, "fallback must be one of error, void, unconstrained");
            rel.default_fallback = *policy;
            fallback_seen = true;
            continue;
        }
        fail(line_no, "unknown directive '" + std::string(tokens[0]) + "'");
    }

    if (!header_seen) throw parse_error("missing 'ontology <extra> -> <source>' header");
    return rel;
}

OntologyRelation load_ontology(const std::string& path, const Taxonomy& extra,
                               const Taxonomy& source) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open ontology file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_ontology(buf.str(), extra, source);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.what());
    }
}

std::string serialize_ontology(const OntologyRelation& relation, const Taxonomy& extra,
                               const Taxonomy& source) {
    std::ostringstream out;
    out << "ontology " << extra.name() << " -> " << source.name() << "\n";
    auto emit_map = [&](const std::string& lhs, const ClassSet& targets) {
        if (targets.none()) return;
        out << "map " << lhs << " -> ";
        bool first = true;
        for (int id : targets.to_ids()) {
            if (!first) out << ", ";
            out << source.class_at(id).name;
            first = false;
        }
        out << "\n";
    };
    for (int e = 0; e < relation.extra_class_count; ++e)
        emit_map(extra.class_at(e).name, relation.entries[static_cast<std::size_t>(e)]);
    if (relation.void_entry) {
        const std::string lhs =
            extra.void_id() ? extra.class_at(*extra.void_id()).name : std::string("void");
        emit_map(lhs, *relation.void_entry);
    }
    for (int id : relation.excluded_source.to_ids())
        out << "exclude " << source.class_at(id).name << "\n";
    out << "fallback " << fallback_name(relation.default_fallback) << "\n";
    return out.str();
}

namespace {

// Canonical ordering: errors first, then code, then subject. Permuting
// document lines must not change the list.
void canonicalize(Diagnostics& diagnostics) {
    std::sort(diagnostics.begin(), diagnostics.end(), [](const Diagnostic& a, const Diagnostic& b) {
        if (a.severity != b.severity) return a.severity == Severity::error;
        if (a.code != b.code) return a.code < b.code;
        if (a.subject != b.subject) return a.subject < b.subject;
        return a.message < b.message;
    });
    diagnostics.erase(std::unique(diagnostics.begin(), diagnostics.end()), diagnostics.end());
}

}  // namespace

Diagnostics validate_ontology(const OntologyRelation& relation, const Taxonomy& extra,
                              const Taxonomy& source) {
    if (relation.extra_class_count != extra.class_count() ||
        relation.source_class_count != source.class_count())
        throw argument_error("relation was parsed against different taxonomies");

    Diagnostics out;
    const int c_source = source.class_count();

    ClassSet reachable(c_source);
    ClassSet mapped_to(c_source);

    for (int e = 0; e < extra.class_count(); ++e) {
        const ClassDef& cls = extra.class_at(e);
        const ClassSet& entry = relation.entries[static_cast<std::size_t>(e)];
        if (cls.is_void) continue;
        if (entry.none()) {
            out.push_back({Severity::error, "uncovered-extra-class", cls.name,
                           "extra class '" + cls.name + "' has no mapping"});
            continue;
        }
        mapped_to |= entry;
        ClassSet row = entry;
        row -= relation.excluded_source;
        if (row.none()) {
            out.push_back({Severity::error, "empty-allowed-set", cls.name,
                           "allowed set of '" + cls.name + "' is empty after exclusions"});
            continue;
        }
        reachable |= row;
        if (row.all()) {
            out.push_back({Severity::warning, "vacuous-constraint", cls.name,
                           "'" + cls.name + "' maps to every source class"});
        }
    }

    if (relation.void_entry) {
        mapped_to |= *relation.void_entry;
        ClassSet row = *relation.void_entry;
        row -= relation.excluded_source;
        reachable |= row;
        if (row.none() && extra.void_id()) {
            const std::string& name = extra.class_at(*extra.void_id()).name;
            out.push_back({Severity::error, "empty-allowed-set", name,
                           "allowed set of '" + name + "' is empty after exclusions"});
        }
    }

    for (int s = 0; s < c_source; ++s) {
        const ClassDef& cls = source.class_at(s);
        if (mapped_to.test(s) && relation.excluded_source.test(s)) {
            out.push_back({Severity::warning, "mapped-and-excluded", cls.name,
                           "source class '" + cls.name + "' is mapped to but excluded"});
        }
        // Excluded classes and the source void class are absent on purpose;
        // warn only about classes that silently became unreachable.
        if (!reachable.test(s) && !relation.excluded_source.test(s) && !cls.is_void) {
            out.push_back({Severity::warning, "unreachable-source-class", cls.name,
                           "source class '" + cls.name + "' is reachable from no extra class"});
        }
    }

    canonicalize(out);
    return out;
}

ConstraintTable::ConstraintTable(std::vector<ClassSet> rows, ClassSet void_row,
                                 std::optional<int> extra_void_id, int source_class_count)
    : rows_(std::move(rows)), void_row_(std::move(void_row)),
      source_class_count_(source_class_count) {
    if (extra_void_id) rows_[static_cast<std::size_t>(*extra_void_id)] = void_row_;
}

const ClassSet& ConstraintTable::row_for(int gt_id) const {
    if (gt_id == kVoidSentinel) return void_row_;
    if (gt_id < 0 || gt_id >= extra_class_count())
        throw argument_error("ground-truth id " + std::to_string(gt_id) +
                             " is outside the extra taxonomy (and not the void sentinel)");
    return rows_[static_cast<std::size_t>(gt_id)];
}

ConstraintTable build_constraint_table(const OntologyRelation& relation, const Taxonomy& extra,
                                       const Taxonomy& source) {
    const Diagnostics diagnostics = validate_ontology(relation, extra, source);
    for (const Diagnostic& d : diagnostics) {
        if (d.severity == Severity::error)
            throw validation_error("ontology is not usable: " + d.code + " " + d.subject + " (" +
                                   d.message + ")");
    }

    std::vector<ClassSet> rows;
    rows.reserve(static_cast<std::size_t>(extra.class_count()));
    ClassSet union_row(source.class_count());
    for (int e = 0; e < extra.class_count(); ++e) {
        ClassSet row = relation.entries[static_cast<std::size_t>(e)];
        row -= relation.excluded_source;
        union_row |= row;
        rows.push_back(std::move(row));
    }

    // Default void row: the union of all allowed classes (a void ground-truth
    // pixel carries no information). An explicit void mapping narrows it.
    ClassSet void_row(source.class_count());
    if (relation.void_entry) {
        void_row = *relation.void_entry;
        void_row -= relation.excluded_source;
    } else {
        void_row = union_row;
    }

    return ConstraintTable(std::move(rows), std::move(void_row), extra.void_id(),
                           source.class_count());
}

}  // namespace ontoseg
