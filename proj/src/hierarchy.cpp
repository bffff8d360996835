// SPDX-License-Identifier: Apache-2.0
#include "patchprobe/hierarchy.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace patchprobe {

namespace {

bool strip_array(const std::string& t, std::string& element)
{
    if (!ClassHierarchy::is_array(t))
        return false;
    element = t.substr(0, t.size() - 2);
    return true;
}

} // namespace

ClassHierarchy::ClassHierarchy()
{
    for (const TypeModel& m : builtin_platform_types())
        types_.emplace(m.name, m);
}

void ClassHierarchy::add(TypeModel model)
{
    types_.insert_or_assign(model.name, std::move(model));
}

bool ClassHierarchy::known(const std::string& name) const
{
    return types_.count(name) != 0;
}

const TypeModel* ClassHierarchy::find(const std::string& name) const
{
    auto it = types_.find(name);
    return it == types_.end() ? nullptr : &it->second;
}

bool ClassHierarchy::is_primitive(const std::string& t)
{
    static const std::set<std::string> prims = {"int", "long", "float", "double",
                                                "boolean", "char", "byte", "short", "void"};
    return prims.count(t) != 0;
}

bool ClassHierarchy::assignable(const std::string& target, const std::string& source) const
{
    if (target == source)
        return true;
    if (source == "null")
        return !is_primitive(target);
    if (is_primitive(target) || is_primitive(source))
        return false;

    std::string src_elem, dst_elem;
    bool src_arr = strip_array(source, src_elem);
    bool dst_arr = strip_array(target, dst_elem);
    if (src_arr && !dst_arr)
        return target == "java.lang.Object" || target == "java.lang.Cloneable" || target == "java.io.Serializable";
    if (src_arr && dst_arr) {
        if (is_primitive(src_elem) || is_primitive(dst_elem))
            return src_elem == dst_elem;
        return assignable(dst_elem, src_elem);
    }
    if (dst_arr)
        return false;
    if (target == "java.lang.Object")
        return true;

    // Breadth-first walk over superclasses and interfaces.
    std::deque<std::string> queue{source};
    std::set<std::string> seen;
    while (!queue.empty()) {
        std::string cur = queue.front();
        queue.pop_front();
        if (cur == target)
            return true;
        if (!seen.insert(cur).second)
            continue;
        const TypeModel* m = find(cur);
        if (!m)
            continue; // unknown class: only Object above it
        if (!m->super.empty() && cur != "java.lang.Object")
            queue.push_back(m->super);
        for (const std::string& i : m->interfaces)
            queue.push_back(i);
    }
    return false;
}

std::string ClassHierarchy::common_superclass(const std::string& a, const std::string& b) const
{
    if (a == b)
        return a;
    if (a == "null")
        return b;
    if (b == "null")
        return a;
    if (is_primitive(a) || is_primitive(b))
        return a == b ? a : "java.lang.Object";

    std::string ae, be;
    if (strip_array(a, ae) && strip_array(b, be)) {
        if (is_primitive(ae) || is_primitive(be))
            return ae == be ? a : "java.lang.Object";
        return common_superclass(ae, be) + "[]";
    }

    if (assignable(a, b))
        return a;
    if (assignable(b, a))
        return b;
    std::string cur = a;
    std::set<std::string> seen;
    while (seen.insert(cur).second) {
        const TypeModel* m = find(cur);
        if (!m || cur == "java.lang.Object" || m->super.empty())
            return "java.lang.Object";
        cur = m->is_interface ? "java.lang.Object" : m->super;
        if (assignable(cur, b))
            return cur;
    }
    return "java.lang.Object";
}

const TypeModel::Field* ClassHierarchy::find_field(const std::string& owner, const std::string& name) const
{
    std::string cur = owner;
    std::set<std::string> seen;
    while (seen.insert(cur).second) {
        const TypeModel* m = find(cur);
        if (!m)
            return nullptr;
        for (const TypeModel::Field& f : m->fields) {
            if (f.name == name)
                return &f;
        }
        // Interface constants are inherited too.
        for (const std::string& i : m->interfaces) {
            if (const TypeModel::Field* f = find_field(i, name))
                return f;
        }
        if (cur == "java.lang.Object" || m->super.empty())
            return nullptr;
        cur = m->super;
    }
    return nullptr;
}

const TypeModel::Method* ClassHierarchy::find_method(const std::string& owner, const std::string& name,
                                                     size_t arity) const
{
    std::string cur = owner;
    std::set<std::string> seen;
    while (seen.insert(cur).second) {
        const TypeModel* m = find(cur);
        if (!m)
            return nullptr;
        for (const TypeModel::Method& mm : m->methods) {
            if (mm.name == name && (mm.params.size() == arity || (mm.varargs && arity + 1 >= mm.params.size())))
                return &mm;
        }
        for (const std::string& i : m->interfaces) {
            if (const TypeModel::Method* mm = find_method(i, name, arity))
                return mm;
        }
        if (cur == "java.lang.Object" || m->super.empty())
            return nullptr;
        cur = m->super;
    }
    return nullptr;
}

namespace {

TypeModel::Method method(std::string name, std::vector<std::string> params, std::string ret,
                         bool is_static = false, bool varargs = false)
{
    return {std::move(name), std::move(params), std::move(ret), is_static, varargs};
}

TypeModel::Field field(std::string name, std::string type, bool is_static, bool is_final,
                       std::optional<std::string> const_literal = std::nullopt)
{
    return {std::move(name), std::move(type), is_static, is_final, std::move(const_literal)};
}

std::vector<TypeModel> build_platform_types()
{
    std::vector<TypeModel> out;
    auto cls = [&out](std::string name, std::string super, std::vector<std::string> ifaces,
                      bool is_interface = false) -> TypeModel& {
        TypeModel m;
        m.name = std::move(name);
        m.super = std::move(super);
        m.interfaces = std::move(ifaces);
        m.is_interface = is_interface;
        out.push_back(std::move(m));
        return out.back();
    };

    {
        TypeModel& m = cls("java.lang.Object", "", {});
        m.methods = {method("toString", {}, "java.lang.String"), method("equals", {"java.lang.Object"}, "boolean"),
                     method("hashCode", {}, "int"), method("getClass", {}, "java.lang.Class"),
                     method("<init>", {}, "void")};
    }
    cls("java.lang.CharSequence", "java.lang.Object", {}, true).methods = {
        method("length", {}, "int"), method("charAt", {"int"}, "char")};
    cls("java.lang.Comparable", "java.lang.Object", {}, true).methods = {
        method("compareTo", {"java.lang.Object"}, "int")};
    cls("java.io.Serializable", "java.lang.Object", {}, true);
    cls("java.lang.Cloneable", "java.lang.Object", {}, true);
    cls("java.lang.Runnable", "java.lang.Object", {}, true).methods = {method("run", {}, "void")};
    cls("java.lang.Iterable", "java.lang.Object", {}, true).methods = {
        method("iterator", {}, "java.util.Iterator")};

    {
        TypeModel& m = cls("java.lang.String", "java.lang.Object",
                           {"java.lang.CharSequence", "java.lang.Comparable", "java.io.Serializable"});
        m.methods = {method("length", {}, "int"),
                     method("charAt", {"int"}, "char"),
                     method("isEmpty", {}, "boolean"),
                     method("substring", {"int"}, "java.lang.String"),
                     method("substring", {"int", "int"}, "java.lang.String"),
                     method("indexOf", {"java.lang.String"}, "int"),
                     method("startsWith", {"java.lang.String"}, "boolean"),
                     method("contains", {"java.lang.CharSequence"}, "boolean"),
                     method("concat", {"java.lang.String"}, "java.lang.String"),
                     method("trim", {}, "java.lang.String"),
                     method("replace", {"char", "char"}, "java.lang.String"),
                     method("toLowerCase", {}, "java.lang.String"),
                     method("toUpperCase", {}, "java.lang.String"),
                     method("equalsIgnoreCase", {"java.lang.String"}, "boolean"),
                     method("format", {"java.lang.String", "java.lang.Object[]"}, "java.lang.String", true, true),
                     method("valueOf", {"java.lang.Object"}, "java.lang.String", true)};
    }
    {
        TypeModel& m = cls("java.lang.StringBuilder", "java.lang.Object", {"java.lang.CharSequence"});
        m.methods = {method("<init>", {}, "void"), method("<init>", {"java.lang.String"}, "void"),
                     method("append", {"java.lang.Object"}, "java.lang.StringBuilder"),
                     method("toString", {}, "java.lang.String"), method("length", {}, "int")};
    }
    {
        TypeModel& m = cls("java.lang.Number", "java.lang.Object", {"java.io.Serializable"});
        m.methods = {method("intValue", {}, "int"), method("longValue", {}, "long"),
                     method("doubleValue", {}, "double"), method("floatValue", {}, "float")};
    }
    {
        TypeModel& m = cls("java.lang.Integer", "java.lang.Number", {"java.lang.Comparable"});
        m.fields = {field("MAX_VALUE", "int", true, true, "int:2147483647"),
                    field("MIN_VALUE", "int", true, true, "int:-2147483648")};
        m.methods = {method("parseInt", {"java.lang.String"}, "int", true),
                     method("valueOf", {"int"}, "java.lang.Integer", true), method("intValue", {}, "int")};
    }
    {
        TypeModel& m = cls("java.lang.Long", "java.lang.Number", {"java.lang.Comparable"});
        m.fields = {field("MAX_VALUE", "long", true, true, "long:9223372036854775807"),
                    field("MIN_VALUE", "long", true, true, "long:-9223372036854775808")};
        m.methods = {method("parseLong", {"java.lang.String"}, "long", true),
                     method("valueOf", {"long"}, "java.lang.Long", true)};
    }
    cls("java.lang.Double", "java.lang.Number", {"java.lang.Comparable"}).methods = {
        method("parseDouble", {"java.lang.String"}, "double", true),
        method("valueOf", {"double"}, "java.lang.Double", true)};
    cls("java.lang.Float", "java.lang.Number", {"java.lang.Comparable"});
    cls("java.lang.Short", "java.lang.Number", {"java.lang.Comparable"});
    cls("java.lang.Byte", "java.lang.Number", {"java.lang.Comparable"});
    {
        TypeModel& m = cls("java.lang.Boolean", "java.lang.Object", {"java.io.Serializable"});
        m.methods = {method("booleanValue", {}, "boolean"), method("valueOf", {"boolean"}, "java.lang.Boolean", true)};
    }
    {
        TypeModel& m = cls("java.lang.Character", "java.lang.Object", {"java.io.Serializable"});
        m.methods = {method("charValue", {}, "char")};
    }
    {
        TypeModel& m = cls("java.lang.Math", "java.lang.Object", {});
        m.fields = {field("PI", "double", true, true, "double:3.141592653589793"),
                    field("E", "double", true, true, "double:2.718281828459045")};
        m.methods = {method("max", {"int", "int"}, "int", true), method("min", {"int", "int"}, "int", true),
                     method("abs", {"int"}, "int", true), method("sqrt", {"double"}, "double", true),
                     method("floor", {"double"}, "double", true)};
    }
    {
        TypeModel& m = cls("java.lang.System", "java.lang.Object", {});
        m.fields = {field("out", "java.io.PrintStream", true, true), field("err", "java.io.PrintStream", true, true),
                    field("in", "java.io.InputStream", true, true)};
        m.methods = {method("currentTimeMillis", {}, "long", true), method("nanoTime", {}, "long", true),
                     method("arraycopy", {"java.lang.Object", "int", "java.lang.Object", "int", "int"}, "void", true),
                     method("getProperty", {"java.lang.String"}, "java.lang.String", true)};
    }
    {
        TypeModel& m = cls("java.io.PrintStream", "java.io.OutputStream", {});
        m.methods = {method("println", {"java.lang.String"}, "void"), method("println", {"int"}, "void"),
                     method("println", {"java.lang.Object"}, "void"), method("println", {}, "void"),
                     method("print", {"java.lang.String"}, "void"), method("print", {"int"}, "void"),
                     method("flush", {}, "void")};
    }
    cls("java.io.OutputStream", "java.lang.Object", {}).methods = {method("write", {"int"}, "void"),
                                                                   method("close", {}, "void")};
    cls("java.io.InputStream", "java.lang.Object", {}).methods = {method("read", {}, "int"),
                                                                  method("close", {}, "void")};
    {
        TypeModel& m = cls("java.lang.Class", "java.lang.Object",
                           {"java.lang.reflect.Type", "java.io.Serializable"});
        m.methods = {method("getComponentType", {}, "java.lang.Class"), method("getName", {}, "java.lang.String"),
                     method("isArray", {}, "boolean")};
    }
    cls("java.lang.reflect.Type", "java.lang.Object", {}, true);
    cls("java.lang.reflect.ParameterizedType", "java.lang.Object", {"java.lang.reflect.Type"}, true);
    cls("java.lang.reflect.GenericArrayType", "java.lang.Object", {"java.lang.reflect.Type"}, true);
    cls("java.lang.reflect.TypeVariable", "java.lang.Object", {"java.lang.reflect.Type"}, true);
    cls("java.lang.reflect.WildcardType", "java.lang.Object", {"java.lang.reflect.Type"}, true);

    {
        TypeModel& m = cls("java.util.Random", "java.lang.Object", {"java.io.Serializable"});
        m.methods = {method("<init>", {}, "void"), method("<init>", {"long"}, "void"),
                     method("nextInt", {}, "int"), method("nextInt", {"int"}, "int"),
                     method("nextLong", {}, "long"), method("nextDouble", {}, "double")};
    }
    {
        TypeModel& m = cls("java.security.SecureRandom", "java.util.Random", {});
        m.methods = {method("<init>", {}, "void"), method("nextBytes", {"byte[]"}, "void")};
    }

    {
        TypeModel& m = cls("java.lang.Throwable", "java.lang.Object", {"java.io.Serializable"});
        m.methods = {method("<init>", {}, "void"), method("<init>", {"java.lang.String"}, "void"),
                     method("<init>", {"java.lang.String", "java.lang.Throwable"}, "void"),
                     method("<init>", {"java.lang.Throwable"}, "void"),
                     method("getMessage", {}, "java.lang.String")};
    }
    auto exception_like = [&](const std::string& name, const std::string& super) {
        TypeModel& m = cls(name, super, {});
        m.methods = {method("<init>", {}, "void"), method("<init>", {"java.lang.String"}, "void"),
                     method("<init>", {"java.lang.String", "java.lang.Throwable"}, "void"),
                     method("<init>", {"java.lang.Throwable"}, "void")};
    };
    exception_like("java.lang.Exception", "java.lang.Throwable");
    exception_like("java.lang.RuntimeException", "java.lang.Exception");
    exception_like("java.lang.IllegalArgumentException", "java.lang.RuntimeException");
    exception_like("java.lang.IllegalStateException", "java.lang.RuntimeException");
    exception_like("java.lang.NullPointerException", "java.lang.RuntimeException");
    exception_like("java.lang.Error", "java.lang.Throwable");
    exception_like("java.io.IOException", "java.lang.Exception");

    cls("java.util.Iterator", "java.lang.Object", {}, true).methods = {
        method("hasNext", {}, "boolean"), method("next", {}, "java.lang.Object")};
    {
        TypeModel& m = cls("java.util.Collection", "java.lang.Object", {"java.lang.Iterable"}, true);
        m.methods = {method("size", {}, "int"), method("add", {"java.lang.Object"}, "boolean"),
                     method("isEmpty", {}, "boolean"), method("contains", {"java.lang.Object"}, "boolean")};
    }
    {
        TypeModel& m = cls("java.util.List", "java.lang.Object", {"java.util.Collection"}, true);
        m.methods = {method("get", {"int"}, "java.lang.Object"), method("add", {"int", "java.lang.Object"}, "void")};
    }
    cls("java.util.Set", "java.lang.Object", {"java.util.Collection"}, true);
    {
        TypeModel& m = cls("java.util.ArrayList", "java.lang.Object", {"java.util.List"});
        m.methods = {method("<init>", {}, "void"), method("<init>", {"int"}, "void"),
                     method("get", {"int"}, "java.lang.Object"), method("add", {"java.lang.Object"}, "boolean"),
                     method("size", {}, "int")};
    }
    {
        TypeModel& m = cls("java.util.Map", "java.lang.Object", {}, true);
        m.methods = {method("put", {"java.lang.Object", "java.lang.Object"}, "java.lang.Object"),
                     method("get", {"java.lang.Object"}, "java.lang.Object"),
                     method("containsKey", {"java.lang.Object"}, "boolean"), method("size", {}, "int")};
    }
    cls("java.util.HashMap", "java.lang.Object", {"java.util.Map"}).methods = {method("<init>", {}, "void")};
    {
        TypeModel& m = cls("java.util.Arrays", "java.lang.Object", {});
        m.methods = {method("asList", {"java.lang.Object[]"}, "java.util.List", true, true),
                     method("sort", {"int[]"}, "void", true), method("fill", {"int[]", "int"}, "void", true),
                     method("copyOf", {"int[]", "int"}, "int[]", true)};
    }
    {
        TypeModel& m = cls("java.util.Objects", "java.lang.Object", {});
        m.methods = {method("requireNonNull", {"java.lang.Object"}, "java.lang.Object", true),
                     method("equals", {"java.lang.Object", "java.lang.Object"}, "boolean", true)};
    }
    cls("java.util.function.Supplier", "java.lang.Object", {}, true).methods = {
        method("get", {}, "java.lang.Object")};
    cls("java.util.function.Function", "java.lang.Object", {}, true).methods = {
        method("apply", {"java.lang.Object"}, "java.lang.Object")};

    return out;
}

} // namespace

const std::vector<TypeModel>& builtin_platform_types()
{
    static const std::vector<TypeModel> types = build_platform_types();
    return types;
}

} // namespace patchprobe
