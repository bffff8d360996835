// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace patchprobe {

// Structural summary of one class, contributed either by a parsed class
// file, a parsed source file, or the built-in platform table.
struct TypeModel {
    struct Method {
        std::string name;
        std::vector<std::string> params;
        std::string return_type = "void";
        bool is_static = false;
        bool varargs = false;
    };
    struct Field {
        std::string name;
        std::string type;
        bool is_static = false;
        bool is_final = false;
        // Compile-time constant value, when the field folds to one.
        std::optional<std::string> const_literal; // canonical "lit:" payload suffix form: "<type>:<value>"
    };

    std::string name; // dotted fully-qualified
    std::string super = "java.lang.Object";
    std::vector<std::string> interfaces;
    bool is_interface = false;
    std::vector<Method> methods;
    std::vector<Field> fields;
};

// Read-only class-hierarchy oracle. Unknown classes conservatively behave
// as direct subclasses of java.lang.Object.
class ClassHierarchy {
public:
    ClassHierarchy();

    void add(TypeModel model);
    bool known(const std::string& name) const;
    const TypeModel* find(const std::string& name) const;

    // True when a value of type `source` may be bound to `target`.
    // The distinguished type "null" is assignable to every reference type.
    bool assignable(const std::string& target, const std::string& source) const;

    // Join for control-flow merges; unknown or unrelated types meet at
    // java.lang.Object.
    std::string common_superclass(const std::string& a, const std::string& b) const;

    const TypeModel::Field* find_field(const std::string& owner, const std::string& name) const;
    const TypeModel::Method* find_method(const std::string& owner, const std::string& name, size_t arity) const;

    static bool is_primitive(const std::string& type_name);
    static bool is_array(const std::string& type_name) { return type_name.size() >= 2 && type_name.ends_with("[]"); }

private:
    std::map<std::string, TypeModel> types_;
};

// Curated summaries of the core platform classes both extractors rely on.
const std::vector<TypeModel>& builtin_platform_types();

} // namespace patchprobe
