// SPDX-License-Identifier: Apache-2.0
#include "patchprobe/feature.hpp"

#include <algorithm>
#include <charconv>

namespace patchprobe {

namespace {

const char* kExcludedNames[] = {"toString", "valueOf", "append", "longValue"};

std::string join_types(const std::vector<std::string>& types)
{
    std::string out;
    for (size_t i = 0; i < types.size(); ++i) {
        if (i)
            out += ',';
        out += types[i];
    }
    return out;
}

std::vector<std::string> simplify_all(const std::vector<std::string>& types)
{
    std::vector<std::string> out;
    out.reserve(types.size());
    for (const std::string& t : types)
        out.push_back(simple_type_name(t));
    return out;
}

} // namespace

bool is_excluded_invocation(const std::string& owner, const std::string& name)
{
    if (name == "<init>")
        return owner == "java.lang.Object" || owner == "java.lang.StringBuilder";
    for (const char* excluded : kExcludedNames) {
        if (name == excluded)
            return true;
    }
    return false;
}

std::string simple_type_name(const std::string& type_name)
{
    size_t dot = type_name.rfind('.');
    if (dot == std::string::npos)
        return type_name;
    return type_name.substr(dot + 1);
}

std::string canonical_int(int64_t value)
{
    return std::to_string(value);
}

namespace {

template <typename T>
std::string shortest_decimal(T value)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, end);
}

} // namespace

std::string canonical_float(float value) { return shortest_decimal(value); }
std::string canonical_double(double value) { return shortest_decimal(value); }

std::string escape_string_value(const std::string& utf8)
{
    std::string out;
    out.reserve(utf8.size());
    for (unsigned char c : utf8) {
        switch (c) {
        case '\\': out += "\\\\"; break;
        case '\n': out += "\\n"; break;
        case '\r': out += "\\r"; break;
        case '\t': out += "\\t"; break;
        case '\0': out += "\\0"; break;
        default:
            if (c < 0x20) {
                char buf[8];
                std::snprintf(buf, sizeof(buf), "\\x%02x", c);
                out += buf;
            } else {
                out += static_cast<char>(c);
            }
        }
    }
    return out;
}

Feature make_literal(const std::string& jvm_type, const std::string& canonical_value)
{
    Feature f;
    f.kind = FeatureKind::Literal;
    f.payload = "lit:" + jvm_type + ":" + canonical_value;
    f.weak_payload = f.payload;
    return f;
}

Feature make_invocation(const std::string& owner, const std::string& name,
                        const std::vector<std::string>& arg_types, bool weak)
{
    Feature f;
    f.kind = FeatureKind::MethodInvocation;
    f.payload = "invoke:" + owner + "." + name + "(" + join_types(arg_types) + ")";
    f.weak_payload =
        "invoke:" + simple_type_name(owner) + "." + name + "(" + join_types(simplify_all(arg_types)) + ")";
    f.weakly_qualified = weak;
    return f;
}

Feature make_field_access(bool write, const std::string& owner, const std::string& name, bool weak)
{
    Feature f;
    f.kind = FeatureKind::FieldAccess;
    const char* prefix = write ? "fieldw:" : "fieldr:";
    f.payload = prefix + owner + "." + name;
    f.weak_payload = prefix + simple_type_name(owner) + "." + name;
    f.weakly_qualified = weak;
    return f;
}

Feature make_array_creation(const std::string& element_type, int dims, bool weak)
{
    Feature f;
    f.kind = FeatureKind::ArrayCreation;
    f.payload = "newarr:" + element_type + "[" + std::to_string(dims) + "]";
    f.weak_payload = "newarr:" + simple_type_name(element_type) + "[" + std::to_string(dims) + "]";
    f.weakly_qualified = weak;
    return f;
}

Feature make_special(const std::string& tag)
{
    Feature f;
    f.kind = FeatureKind::SpecialInstruction;
    f.payload = "special:" + tag;
    f.weak_payload = f.payload;
    return f;
}

Feature make_switch_label(int32_t value)
{
    return make_special("switch-label:" + std::to_string(value));
}

size_t intersection_size(const FeatureSet& a, const FeatureSet& b)
{
    size_t exact = 0;
    std::vector<const Feature*> rest_a;
    std::vector<const Feature*> rest_b;
    auto ia = a.begin();
    auto ib = b.begin();
    while (ia != a.end() && ib != b.end()) {
        if (ia->payload == ib->payload) {
            ++exact;
            ++ia;
            ++ib;
        } else if (ia->payload < ib->payload) {
            rest_a.push_back(&*ia++);
        } else {
            rest_b.push_back(&*ib++);
        }
    }
    for (; ia != a.end(); ++ia)
        rest_a.push_back(&*ia);
    for (; ib != b.end(); ++ib)
        rest_b.push_back(&*ib);

    // Weakly qualified leftovers match on simple-name payloads. Greedy over
    // the sorted orders keeps the count deterministic.
    size_t weak = 0;
    std::vector<bool> used(rest_b.size(), false);
    for (const Feature* fa : rest_a) {
        for (size_t j = 0; j < rest_b.size(); ++j) {
            if (used[j])
                continue;
            const Feature* fb = rest_b[j];
            if ((fa->weakly_qualified || fb->weakly_qualified) && fa->weak_payload == fb->weak_payload) {
                used[j] = true;
                ++weak;
                break;
            }
        }
    }
    return exact + weak;
}

double jaccard(const FeatureSet& a, const FeatureSet& b)
{
    if (a.empty() && b.empty())
        return 1.0;
    size_t inter = intersection_size(a, b);
    size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

bool equivalent(const FeatureSet& a, const FeatureSet& b, double sigma_f)
{
    return jaccard(a, b) >= sigma_f;
}

FeatureSet set_union(const FeatureSet& a, const FeatureSet& b)
{
    FeatureSet out = a;
    out.insert(b.begin(), b.end());
    return out;
}

} // namespace patchprobe
