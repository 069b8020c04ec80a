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

/// Fixed-width bitset over source class ids. Width is the source class
/// count; one of these is the "allowed set" the refinement mask reads per
/// pixel, so test() is the hot path.
class ClassSet {
public:
    ClassSet() = default;
    explicit ClassSet(int width)
        : width_(width), words_(static_cast<std::size_t>((width + 63) / 64), 0) {}

    int width() const { return width_; }

    void set(int i) { words_[static_cast<std::size_t>(i) >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(int i) { words_[static_cast<std::size_t>(i) >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    bool test(int i) const {
        return (words_[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1u;
    }

    int count() const;
    bool none() const;
    bool all() const { return count() == width_; }

    ClassSet& operator|=(const ClassSet& other);
    ClassSet& operator-=(const ClassSet& other);  // set difference

    std::vector<int> to_ids() const;

    bool operator==(const ClassSet&) const = default;

private:
    int width_ = 0;
    std::vector<std::uint64_t> words_;
};

/// What to do with a pixel whose allowed set keeps no probability mass.
enum class FallbackPolicy {
    Error,               // fail the operation, naming the first such pixel
    Void,                // emit the void sentinel there
    UnconstrainedArgmax  // keep the unmasked scores for that pixel
};

std::string_view fallback_name(FallbackPolicy policy);
std::optional<FallbackPolicy> fallback_from_name(std::string_view name);

/// Bipartite relation between an extra taxonomy and the source taxonomy,
/// stored in the one canonical direction the refinement consumes: extra
/// class id -> set of allowed source class ids. A `map void -> ...` line
/// (or a map line naming the extra taxonomy's declared void class) lands in
/// void_entry and narrows the otherwise permissive void row.
struct OntologyRelation {
    std::string extra_taxonomy;
    std::string source_taxonomy;
    int extra_class_count = 0;
    int source_class_count = 0;
    std::vector<ClassSet> entries;         // indexed by extra id; empty set = unmapped
    std::optional<ClassSet> void_entry;    // explicit void mapping, if declared
    ClassSet excluded_source;              // dataset-level absent source classes
    FallbackPolicy default_fallback = FallbackPolicy::Void;

    bool operator==(const OntologyRelation&) const = default;
};

enum class Severity { warning, error };

struct Diagnostic {
    Severity severity = Severity::warning;
    std::string code;
    std::string subject;  // class name in one of the two taxonomies
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

using Diagnostics = std::vector<Diagnostic>;

int error_count(const Diagnostics& diagnostics);
int warning_count(const Diagnostics& diagnostics);

/// One record per line: SEVERITY CODE subject "message"
std::string format_diagnostics(const Diagnostics& diagnostics);

/// Parses an ontology document:
///
///   ontology <extra-taxonomy-name> -> <source-taxonomy-name>
///   map <extra-class-name> -> <source-class-name>[, <source-class-name>]*
///   exclude <source-class-name>
///   fallback <error|void|unconstrained>
///
/// Multiple map lines for one extra class union their right-hand sides.
/// Unknown class names and header mismatches are parse errors; semantic
/// problems (coverage, emptied rows) are reported by validate_ontology.
OntologyRelation parse_ontology(std::string_view document, const Taxonomy& extra,
                                const Taxonomy& source);

OntologyRelation load_ontology(const std::string& path, const Taxonomy& extra,
                               const Taxonomy& source);

/// Canonical text form, map lines ordered by extra id with sorted right-hand
/// sides. Reparsing yields a structurally identical relation.
std::string serialize_ontology(const OntologyRelation& relation, const Taxonomy& extra,
                               const Taxonomy& source);

/// Semantic checks. Errors make the relation unusable for refinement:
///   uncovered-extra-class   a non-void extra class has no map line
///   empty-allowed-set       exclusions leave a mapped class with no classes
/// Warnings flag suspicious but workable declarations:
///   mapped-and-excluded     a source class is both mapped-to and excluded
///   unreachable-source-class  a source class no row can ever emit
///   vacuous-constraint      a row that permits every source class
/// The result is canonically ordered (errors first, then by code/subject)
/// and independent of declaration order.
Diagnostics validate_ontology(const OntologyRelation& relation, const Taxonomy& extra,
                              const Taxonomy& source);

/// Per-extra-class allowed sets, exclusion-subtracted, with the void row
/// materialized. O(1) lookup per ground-truth id.
class ConstraintTable {
public:
    ConstraintTable(std::vector<ClassSet> rows, ClassSet void_row, std::optional<int> extra_void_id,
                    int source_class_count);

    /// Row for a ground-truth label-map value: 255 and the declared void
    /// class map to the void row. Throws on other out-of-range ids.
    const ClassSet& row_for(int gt_id) const;

    const ClassSet& void_row() const { return void_row_; }
    int extra_class_count() const { return static_cast<int>(rows_.size()); }
    int source_class_count() const { return source_class_count_; }

private:
    std::vector<ClassSet> rows_;
    ClassSet void_row_;
    int source_class_count_ = 0;
};

/// Builds the lookup table. Refuses (with the first validation error) if
/// validate_ontology reports any error.
ConstraintTable build_constraint_table(const OntologyRelation& relation, const Taxonomy& extra,
                                       const Taxonomy& source);

/// Label-map value used for unlabeled pixels everywhere in the toolkit.
inline constexpr int kVoidSentinel = 255;

}  // namespace ontoseg
