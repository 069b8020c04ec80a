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

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace ontoseg {

struct Rgb {
    std::uint8_t r = 0, g = 0, b = 0;
    bool operator==(const Rgb&) const = default;
};

struct ClassDef {
    int id = 0;
    std::string name;  // lowercase token, [a-z0-9_-]+
    Rgb color;
    bool is_void = false;

    bool operator==(const ClassDef&) const = default;
};

/// One label space: a dense, ordered class list. Immutable after parse;
/// safe to share across threads.
class Taxonomy {
public:
    Taxonomy(std::string name, std::vector<ClassDef> classes);

    const std::string& name() const { return name_; }
    const std::vector<ClassDef>& classes() const { return classes_; }
    int class_count() const { return static_cast<int>(classes_.size()); }
    const ClassDef& class_at(int id) const;

    /// Declared void class, if any. The 255 label-map sentinel is always
    /// treated as void regardless of this.
    std::optional<int> void_id() const { return void_id_; }

    /// Case-insensitive name lookup. Returns nullopt for unknown names.
    std::optional<int> find(std::string_view name) const;

    bool operator==(const Taxonomy&) const = default;

private:
    std::string name_;
    std::vector<ClassDef> classes_;
    std::optional<int> void_id_;
};

/// Parses a taxonomy document:
///
///   taxonomy <name>
///   class <id> <name> <r> <g> <b> [void]
///
/// '#' starts a comment; blank lines are ignored. Every other line must be
/// one of the two forms above or parsing fails with a line-located Error.
/// The result always satisfies the taxonomy invariants: ids dense 0..C-1,
/// unique names, at most one void class.
Taxonomy parse_taxonomy(std::string_view document);

/// Reads and parses a .tax file; errors carry the path.
Taxonomy load_taxonomy(const std::string& path);

/// Canonical text form: classes ordered by id. parse(serialize(t)) == t.
std::string serialize_taxonomy(const Taxonomy& taxonomy);

}  // namespace ontoseg
