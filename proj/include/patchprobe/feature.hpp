// SPDX-License-Identifier: Apache-2.0
//
// Canonical feature model shared by the source and bytecode extractors.
// Payload encoding (bit-exact contract between the two sides):
//   lit:<jvm-type>:<canonical-value>   ints decimal; floats shortest
//                                      round-trip decimal; strings UTF-8
//                                      with backslash escapes
//   invoke:<owner-fqn>.<name>(<type1>,<type2>,...)
//   fieldr:<owner-fqn>.<name> / fieldw:<owner-fqn>.<name>
//   newarr:<element-type-fqn>[<dims>]
//   special:<shl|shr|ushr|instanceof|inc|dec|return|throw|branch|loop|
//            monitor|switch-label:<int>|lambda>
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace patchprobe {

enum class FeatureKind {
    Literal,
    MethodInvocation,
    FieldAccess,
    ArrayCreation,
    SpecialInstruction,
};

struct Feature {
    FeatureKind kind = FeatureKind::SpecialInstruction;
    std::string payload;
    // Payload with every type name reduced to its simple (unqualified) form;
    // used when one side could not fully qualify a type.
    std::string weak_payload;
    bool weakly_qualified = false;

    bool operator<(const Feature& other) const { return payload < other.payload; }
    bool operator==(const Feature& other) const { return payload == other.payload; }
};

using FeatureSet = std::set<Feature>;

// Method invocations the compiler generates implicitly; they never become
// features on either side.
bool is_excluded_invocation(const std::string& owner, const std::string& name);

// Reduces "a.b.C" to "C"; keeps primitive names and [] suffixes intact.
std::string simple_type_name(const std::string& type_name);

// Canonical literal value spellings.
std::string canonical_int(int64_t value);
std::string canonical_float(float value);
std::string canonical_double(double value);
std::string escape_string_value(const std::string& utf8);

Feature make_literal(const std::string& jvm_type, const std::string& canonical_value);
// Returns a feature with weak qualification tracked; `weak` marks that at
// least one type component could not be fully qualified.
Feature make_invocation(const std::string& owner, const std::string& name,
                        const std::vector<std::string>& arg_types, bool weak = false);
Feature make_field_access(bool write, const std::string& owner, const std::string& name, bool weak = false);
Feature make_array_creation(const std::string& element_type, int dims, bool weak = false);
Feature make_special(const std::string& tag);
Feature make_switch_label(int32_t value);

// Jaccard similarity with the convention that two empty sets are fully
// similar. The intersection honors weak qualification: a weakly qualified
// feature matches a counterpart whose simple-name payload agrees.
double jaccard(const FeatureSet& a, const FeatureSet& b);
size_t intersection_size(const FeatureSet& a, const FeatureSet& b);
bool equivalent(const FeatureSet& a, const FeatureSet& b, double sigma_f);

FeatureSet set_union(const FeatureSet& a, const FeatureSet& b);

} // namespace patchprobe
