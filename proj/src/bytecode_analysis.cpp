// SPDX-License-Identifier: Apache-2.0
#include "patchprobe/bytecode_analysis.hpp"

#include <algorithm>
#include <deque>

namespace patchprobe::bc {

namespace op {
// Opcode values referenced by name throughout the analysis.
constexpr uint8_t aconst_null = 1;
constexpr uint8_t iconst_m1 = 2;
constexpr uint8_t iconst_5 = 8;
constexpr uint8_t lconst_0 = 9;
constexpr uint8_t lconst_1 = 10;
constexpr uint8_t fconst_0 = 11;
constexpr uint8_t fconst_2 = 13;
constexpr uint8_t dconst_0 = 14;
constexpr uint8_t dconst_1 = 15;
constexpr uint8_t bipush = 16;
constexpr uint8_t sipush = 17;
constexpr uint8_t ldc = 18;
constexpr uint8_t ldc_w = 19;
constexpr uint8_t ldc2_w = 20;
constexpr uint8_t iload = 21;
constexpr uint8_t aload = 25;
constexpr uint8_t iload_0 = 26;
constexpr uint8_t aload_3 = 45;
constexpr uint8_t iaload = 46;
constexpr uint8_t aaload = 50;
constexpr uint8_t saload = 53;
constexpr uint8_t istore = 54;
constexpr uint8_t astore = 58;
constexpr uint8_t istore_0 = 59;
constexpr uint8_t astore_3 = 78;
constexpr uint8_t iastore = 79;
constexpr uint8_t sastore = 86;
constexpr uint8_t pop = 87;
constexpr uint8_t pop2 = 88;
constexpr uint8_t dup = 89;
constexpr uint8_t dup_x1 = 90;
constexpr uint8_t dup_x2 = 91;
constexpr uint8_t dup2 = 92;
constexpr uint8_t dup2_x1 = 93;
constexpr uint8_t dup2_x2 = 94;
constexpr uint8_t swap = 95;
constexpr uint8_t iadd = 96;
constexpr uint8_t lxor = 131;
constexpr uint8_t iinc = 132;
constexpr uint8_t i2l = 133;
constexpr uint8_t i2s = 147;
constexpr uint8_t lcmp = 148;
constexpr uint8_t dcmpg = 152;
constexpr uint8_t ifeq = 153;
constexpr uint8_t ifle = 158;
constexpr uint8_t if_icmpeq = 159;
constexpr uint8_t if_acmpne = 166;
constexpr uint8_t goto_ = 167;
constexpr uint8_t jsr = 168;
constexpr uint8_t ret = 169;
constexpr uint8_t tableswitch = 170;
constexpr uint8_t lookupswitch = 171;
constexpr uint8_t ireturn = 172;
constexpr uint8_t return_ = 177;
constexpr uint8_t getstatic = 178;
constexpr uint8_t putstatic = 179;
constexpr uint8_t getfield = 180;
constexpr uint8_t putfield = 181;
constexpr uint8_t invokevirtual = 182;
constexpr uint8_t invokespecial = 183;
constexpr uint8_t invokestatic = 184;
constexpr uint8_t invokeinterface = 185;
constexpr uint8_t invokedynamic = 186;
constexpr uint8_t new_ = 187;
constexpr uint8_t newarray = 188;
constexpr uint8_t anewarray = 189;
constexpr uint8_t arraylength = 190;
constexpr uint8_t athrow = 191;
constexpr uint8_t checkcast = 192;
constexpr uint8_t instanceof_ = 193;
constexpr uint8_t monitorenter = 194;
constexpr uint8_t monitorexit = 195;
constexpr uint8_t multianewarray = 197;
constexpr uint8_t ifnull = 198;
constexpr uint8_t ifnonnull = 199;
constexpr uint8_t goto_w = 200;
constexpr uint8_t jsr_w = 201;
} // namespace op

namespace {

constexpr const char* kTop = "$top"; // second slot of a long/double value

bool is_conditional_branch(uint8_t opcode)
{
    return (opcode >= op::ifeq && opcode <= op::if_acmpne) || opcode == op::ifnull || opcode == op::ifnonnull;
}

bool is_unconditional_goto(uint8_t opcode) { return opcode == op::goto_ || opcode == op::goto_w; }

bool ends_flow(uint8_t opcode)
{
    return is_unconditional_goto(opcode) || opcode == op::athrow || opcode == op::ret
        || (opcode >= op::ireturn && opcode <= op::return_) || opcode == op::tableswitch
        || opcode == op::lookupswitch;
}

// Class constant entries for array types carry descriptors, e.g.
// "[Ljava.lang.String;" after dot conversion.
std::string type_from_class_entry(const std::string& name)
{
    if (name.empty() || name[0] != '[')
        return name;
    size_t dims = 0;
    while (dims < name.size() && name[dims] == '[')
        ++dims;
    std::string base;
    switch (name[dims]) {
    case 'B': base = "byte"; break;
    case 'C': base = "char"; break;
    case 'D': base = "double"; break;
    case 'F': base = "float"; break;
    case 'I': base = "int"; break;
    case 'J': base = "long"; break;
    case 'S': base = "short"; break;
    case 'Z': base = "boolean"; break;
    case 'L': base = name.substr(dims + 1, name.find(';', dims) - dims - 1); break;
    default: base = "java.lang.Object"; break;
    }
    for (size_t i = 0; i < dims; ++i)
        base += "[]";
    return base;
}

} // namespace

size_t Cfg::block_index(uint32_t offset) const
{
    auto it = std::upper_bound(leaders.begin(), leaders.end(), offset);
    return static_cast<size_t>(std::distance(leaders.begin(), it)) - 1;
}

std::vector<LogicalBlock> split_blocks(const cf::InstructionStream& stream, const cf::LineMap& lines)
{
    std::vector<LogicalBlock> blocks;
    size_t i = 0;
    while (i < stream.size()) {
        int line = lines.line_at(stream[i].offset);
        size_t j = i + 1;
        while (j < stream.size() && lines.line_at(stream[j].offset) == line)
            ++j;
        LogicalBlock b;
        b.index = static_cast<int>(blocks.size());
        b.line = line;
        b.first = i;
        b.count = j - i;
        blocks.push_back(std::move(b));
        i = j;
    }
    return blocks;
}

Cfg build_cfg(const cf::MethodBody& body)
{
    Cfg cfg;
    const cf::InstructionStream& stream = body.instructions;
    if (stream.empty())
        return cfg;

    std::set<uint32_t> leaders{stream.front().offset};
    auto mark = [&](int32_t target) { leaders.insert(static_cast<uint32_t>(target)); };

    for (size_t i = 0; i < stream.size(); ++i) {
        const cf::Instruction& ins = stream[i];
        bool splits = false;
        if (ins.branch_target >= 0) {
            mark(ins.branch_target);
            splits = true;
        }
        if (ins.switch_default >= 0) {
            mark(ins.switch_default);
            for (const auto& [value, target] : ins.switch_pairs)
                mark(target);
            splits = true;
        }
        if (ends_flow(ins.opcode) || (ins.opcode >= op::ireturn && ins.opcode <= op::return_) || ins.opcode == op::athrow)
            splits = true;
        if (splits && i + 1 < stream.size())
            leaders.insert(stream[i + 1].offset);
    }
    for (const cf::ExceptionEntry& e : body.exception_table)
        leaders.insert(e.handler_pc);

    cfg.leaders.assign(leaders.begin(), leaders.end());

    for (size_t i = 0; i < stream.size(); ++i) {
        const cf::Instruction& ins = stream[i];
        uint32_t next = i + 1 < stream.size() ? stream[i + 1].offset : 0;
        bool block_ends = i + 1 >= stream.size() || leaders.count(next);
        if (!block_ends)
            continue;
        if (ins.branch_target >= 0) {
            cfg.edges.push_back({ins.offset, static_cast<uint32_t>(ins.branch_target), Cfg::Edge::Kind::Branch});
            if (is_conditional_branch(ins.opcode) && i + 1 < stream.size())
                cfg.edges.push_back({ins.offset, next, Cfg::Edge::Kind::Fallthrough});
        } else if (ins.switch_default >= 0) {
            cfg.edges.push_back({ins.offset, static_cast<uint32_t>(ins.switch_default), Cfg::Edge::Kind::Switch});
            for (const auto& [value, target] : ins.switch_pairs)
                cfg.edges.push_back({ins.offset, static_cast<uint32_t>(target), Cfg::Edge::Kind::Switch});
        } else if (!ends_flow(ins.opcode) && i + 1 < stream.size()) {
            cfg.edges.push_back({ins.offset, next, Cfg::Edge::Kind::Fallthrough});
        }
    }
    for (const cf::ExceptionEntry& e : body.exception_table) {
        // One handler edge per protected block.
        for (uint32_t leader : cfg.leaders) {
            if (leader >= e.start_pc && leader < e.end_pc)
                cfg.edges.push_back({leader, e.handler_pc, Cfg::Edge::Kind::Handler});
        }
    }
    return cfg;
}

std::set<int> detect_loops(const Cfg& cfg, const cf::InstructionStream& stream, const cf::LineMap& lines)
{
    (void)stream;
    std::set<int> out;
    for (const Cfg::Edge& e : cfg.edges) {
        if (e.kind == Cfg::Edge::Kind::Branch && e.target < e.source)
            out.insert(lines.line_at(e.target));
    }
    return out;
}

namespace {

struct Frame {
    std::vector<std::string> stack;
    std::vector<std::string> locals;
};

struct Bail {
    std::string reason;
};

class Interpreter {
public:
    Interpreter(const cf::MethodBody& body, const ClassHierarchy& hierarchy)
        : body_(body), pool_owner_(nullptr), hierarchy_(hierarchy)
    {
    }

    void set_class(const cf::RawClass* cls) { pool_owner_ = cls; }

    Frame initial_frame() const
    {
        Frame f;
        f.locals.assign(body_.max_locals, "");
        size_t slot = 0;
        if ((body_.access_flags & cf::kAccStatic) == 0) {
            if (slot < f.locals.size())
                f.locals[slot] = body_.owner;
            ++slot;
        }
        for (const std::string& p : cf::parse_method_descriptor_params(body_.descriptor)) {
            if (slot < f.locals.size())
                f.locals[slot] = p;
            ++slot;
            if (p == "long" || p == "double") {
                if (slot < f.locals.size())
                    f.locals[slot] = kTop;
                ++slot;
            }
        }
        return f;
    }

    std::string merge_type(const std::string& a, const std::string& b) const
    {
        if (a == b)
            return a;
        if (a.empty())
            return b;
        if (b.empty())
            return a;
        if (a == kTop || b == kTop)
            return "";
        bool prim_a = ClassHierarchy::is_primitive(a);
        bool prim_b = ClassHierarchy::is_primitive(b);
        if (prim_a || prim_b)
            return prim_a && prim_b && a == b ? a : "";
        return hierarchy_.common_superclass(a, b);
    }

    // Returns true when dst changed. Throws Bail on stack depth mismatch.
    bool merge_frame(Frame& dst, const Frame& src) const
    {
        if (dst.stack.size() != src.stack.size())
            throw Bail{"stack depth mismatch on merge"};
        bool changed = false;
        for (size_t i = 0; i < dst.stack.size(); ++i) {
            std::string m = merge_type(dst.stack[i], src.stack[i]);
            if (m != dst.stack[i]) {
                dst.stack[i] = m;
                changed = true;
            }
        }
        size_t n = std::max(dst.locals.size(), src.locals.size());
        dst.locals.resize(n, "");
        for (size_t i = 0; i < n; ++i) {
            std::string s = i < src.locals.size() ? src.locals[i] : "";
            std::string m = merge_type(dst.locals[i], s);
            if (m != dst.locals[i]) {
                dst.locals[i] = m;
                changed = true;
            }
        }
        return changed;
    }

    bool merge_locals(Frame& dst, const Frame& src) const
    {
        Frame src_locals_only;
        src_locals_only.stack = dst.stack;
        src_locals_only.locals = src.locals;
        return merge_frame(dst, src_locals_only);
    }

    void push(Frame& f, const std::string& t) const
    {
        f.stack.push_back(t);
        if (t == "long" || t == "double")
            f.stack.push_back(kTop);
    }

    std::string pop_slot(Frame& f) const
    {
        if (f.stack.empty())
            throw Bail{"stack underflow"};
        std::string t = f.stack.back();
        f.stack.pop_back();
        return t;
    }

    // Pops one logical value (two slots for category-2 types).
    std::string pop_value(Frame& f) const
    {
        std::string t = pop_slot(f);
        if (t == kTop)
            return pop_slot(f);
        return t;
    }

    void store_local(Frame& f, size_t index, const std::string& t) const
    {
        size_t needed = index + ((t == "long" || t == "double") ? 2 : 1);
        if (f.locals.size() < needed)
            f.locals.resize(needed, "");
        f.locals[index] = t;
        if (t == "long" || t == "double")
            f.locals[index + 1] = kTop;
    }

    std::string load_local(const Frame& f, size_t index) const
    {
        if (index >= f.locals.size())
            return "";
        return f.locals[index];
    }

    using Recorder = std::map<uint32_t, std::vector<std::string>>;

    void exec(const cf::Instruction& ins, Frame& f, Recorder* recorder) const
    {
        const cf::ConstantPool& pool = pool_owner_->constant_pool;
        uint8_t o = ins.opcode;

        if (o == op::jsr || o == op::jsr_w || o == op::ret)
            throw Bail{"jsr/ret subroutines unsupported"};

        if (o == op::aconst_null) {
            push(f, "null");
        } else if (o >= op::iconst_m1 && o <= op::iconst_5) {
            push(f, "int");
        } else if (o == op::lconst_0 || o == op::lconst_1) {
            push(f, "long");
        } else if (o >= op::fconst_0 && o <= op::fconst_2) {
            push(f, "float");
        } else if (o == op::dconst_0 || o == op::dconst_1) {
            push(f, "double");
        } else if (o == op::bipush || o == op::sipush) {
            push(f, "int");
        } else if (o == op::ldc || o == op::ldc_w || o == op::ldc2_w) {
            push(f, ldc_type(pool, ins.cp_index));
        } else if (o >= op::iload && o <= op::aload) {
            push(f, load_or_default(f, ins.local, o - op::iload));
        } else if (o >= op::iload_0 && o <= op::aload_3) {
            push(f, load_or_default(f, (o - op::iload_0) % 4, (o - op::iload_0) / 4));
        } else if (o >= op::iaload && o <= op::saload) {
            pop_value(f); // index
            std::string arr = pop_value(f);
            static const char* kinds[] = {"int", "long", "float", "double", nullptr, "int", "char", "short"};
            if (o == op::aaload) {
                push(f, ClassHierarchy::is_array(arr) ? arr.substr(0, arr.size() - 2) : "java.lang.Object");
            } else {
                push(f, kinds[o - op::iaload]);
            }
        } else if (o >= op::istore && o <= op::astore) {
            store_local(f, ins.local, pop_value(f));
        } else if (o >= op::istore_0 && o <= op::astore_3) {
            store_local(f, (o - op::istore_0) % 4, pop_value(f));
        } else if (o >= op::iastore && o <= op::sastore) {
            pop_value(f);
            pop_value(f);
            pop_value(f);
        } else if (o == op::pop) {
            pop_slot(f);
        } else if (o == op::pop2) {
            pop_slot(f);
            pop_slot(f);
        } else if (o == op::dup) {
            std::string a = pop_slot(f);
            f.stack.push_back(a);
            f.stack.push_back(a);
        } else if (o == op::dup_x1) {
            std::string a = pop_slot(f), b = pop_slot(f);
            f.stack.push_back(a);
            f.stack.push_back(b);
            f.stack.push_back(a);
        } else if (o == op::dup_x2) {
            std::string a = pop_slot(f), b = pop_slot(f), c = pop_slot(f);
            f.stack.push_back(a);
            f.stack.push_back(c);
            f.stack.push_back(b);
            f.stack.push_back(a);
        } else if (o == op::dup2) {
            std::string a = pop_slot(f), b = pop_slot(f);
            f.stack.push_back(b);
            f.stack.push_back(a);
            f.stack.push_back(b);
            f.stack.push_back(a);
        } else if (o == op::dup2_x1) {
            std::string a = pop_slot(f), b = pop_slot(f), c = pop_slot(f);
            f.stack.push_back(b);
            f.stack.push_back(a);
            f.stack.push_back(c);
            f.stack.push_back(b);
            f.stack.push_back(a);
        } else if (o == op::dup2_x2) {
            std::string a = pop_slot(f), b = pop_slot(f), c = pop_slot(f), d = pop_slot(f);
            f.stack.push_back(b);
            f.stack.push_back(a);
            f.stack.push_back(d);
            f.stack.push_back(c);
            f.stack.push_back(b);
            f.stack.push_back(a);
        } else if (o == op::swap) {
            std::string a = pop_slot(f), b = pop_slot(f);
            f.stack.push_back(a);
            f.stack.push_back(b);
        } else if (o >= op::iadd && o <= op::lxor && o != 116 && o != 117 && o != 118 && o != 119) {
            // Binary arithmetic/shift/logic; result kind follows the opcode family.
            static const char* kinds[] = {"int", "long", "float", "double"};
            pop_value(f);
            pop_value(f);
            if (o >= 120 && o <= 125) // shifts: int/long alternate
                push(f, (o % 2 == 0) ? "int" : "long");
            else if (o >= 126) // and/or/xor: int/long alternate
                push(f, (o % 2 == 0) ? "int" : "long");
            else
                push(f, kinds[(o - op::iadd) % 4]);
        } else if (o >= 116 && o <= 119) { // ineg..dneg
            static const char* kinds[] = {"int", "long", "float", "double"};
            pop_value(f);
            push(f, kinds[o - 116]);
        } else if (o == op::iinc) {
            // locals unchanged in type
        } else if (o >= op::i2l && o <= op::i2s) {
            static const char* targets[] = {"long", "float", "double", "int", "float", "double",
                                            "int", "long", "double", "int", "long", "float",
                                            "int", "int", "int"};
            pop_value(f);
            push(f, targets[o - op::i2l]);
        } else if (o >= op::lcmp && o <= op::dcmpg) {
            pop_value(f);
            pop_value(f);
            push(f, "int");
        } else if (o >= op::ifeq && o <= op::ifle) {
            pop_value(f);
        } else if (o >= op::if_icmpeq && o <= op::if_acmpne) {
            pop_value(f);
            pop_value(f);
        } else if (o == op::ifnull || o == op::ifnonnull) {
            pop_value(f);
        } else if (o == op::goto_ || o == op::goto_w) {
            // no stack effect
        } else if (o == op::tableswitch || o == op::lookupswitch) {
            pop_value(f);
        } else if (o >= op::ireturn && o <= op::return_) {
            if (o != op::return_)
                pop_value(f);
        } else if (o == op::getstatic || o == op::getfield) {
            cf::MemberRef m = pool.member(ins.cp_index);
            if (o == op::getfield)
                pop_value(f);
            push(f, cf::parse_field_descriptor(m.descriptor));
        } else if (o == op::putstatic || o == op::putfield) {
            pop_value(f);
            if (o == op::putfield)
                pop_value(f);
        } else if (o >= op::invokevirtual && o <= op::invokeinterface) {
            cf::MemberRef m = pool.member(ins.cp_index);
            record_invocation(f, ins, cf::parse_method_descriptor_params(m.descriptor), recorder);
            if (o != op::invokestatic)
                pop_value(f); // receiver
            std::string ret = cf::parse_method_descriptor_return(m.descriptor);
            if (ret != "void")
                push(f, ret);
        } else if (o == op::invokedynamic) {
            const cf::ConstantEntry& e = pool.at(ins.cp_index, cf::CpTag::InvokeDynamic);
            cf::NameAndType nt = pool.name_and_type(e.ref2);
            record_invocation(f, ins, cf::parse_method_descriptor_params(nt.descriptor), recorder);
            std::string ret = cf::parse_method_descriptor_return(nt.descriptor);
            if (ret != "void")
                push(f, ret);
        } else if (o == op::new_) {
            push(f, pool.class_name(ins.cp_index));
        } else if (o == op::newarray) {
            pop_value(f);
            static const std::map<int, std::string> kinds = {{4, "boolean"}, {5, "char"},  {6, "float"},
                                                             {7, "double"},  {8, "byte"},  {9, "short"},
                                                             {10, "int"},    {11, "long"}};
            auto it = kinds.find(ins.imm);
            push(f, (it == kinds.end() ? std::string("int") : it->second) + "[]");
        } else if (o == op::anewarray) {
            pop_value(f);
            push(f, type_from_class_entry(pool.class_name(ins.cp_index)) + "[]");
        } else if (o == op::arraylength) {
            pop_value(f);
            push(f, "int");
        } else if (o == op::athrow) {
            pop_value(f);
        } else if (o == op::checkcast) {
            pop_value(f);
            push(f, type_from_class_entry(pool.class_name(ins.cp_index)));
        } else if (o == op::instanceof_) {
            pop_value(f);
            push(f, "int");
        } else if (o == op::monitorenter || o == op::monitorexit) {
            pop_value(f);
        } else if (o == op::multianewarray) {
            for (int i = 0; i < ins.dims; ++i)
                pop_value(f);
            push(f, type_from_class_entry(pool.class_name(ins.cp_index)));
        }
        // nop and remaining no-effect opcodes fall through
    }

private:
    std::string load_or_default(const Frame& f, size_t index, int family) const
    {
        std::string t = load_local(f, index);
        if (!t.empty() && t != kTop)
            return t;
        static const char* families[] = {"int", "long", "float", "double", "java.lang.Object"};
        return families[family];
    }

    std::string ldc_type(const cf::ConstantPool& pool, uint16_t index) const
    {
        const cf::ConstantEntry& e = pool.at(index);
        switch (e.tag) {
        case cf::CpTag::Integer: return "int";
        case cf::CpTag::Float: return "float";
        case cf::CpTag::Long: return "long";
        case cf::CpTag::Double: return "double";
        case cf::CpTag::String: return "java.lang.String";
        case cf::CpTag::Class: return "java.lang.Class";
        case cf::CpTag::MethodType: return "java.lang.invoke.MethodType";
        case cf::CpTag::MethodHandle: return "java.lang.invoke.MethodHandle";
        case cf::CpTag::Dynamic: {
            cf::NameAndType nt = pool.name_and_type(e.ref2);
            return cf::parse_field_descriptor(nt.descriptor);
        }
        default:
            throw Bail{"ldc of unsupported constant kind"};
        }
    }

    void record_invocation(Frame& f, const cf::Instruction& ins, const std::vector<std::string>& declared,
                           Recorder* recorder) const
    {
        std::vector<std::string> popped(declared.size());
        for (size_t i = declared.size(); i-- > 0;)
            popped[i] = pop_value(f);
        if (!recorder)
            return;
        std::vector<std::string> refined(declared.size());
        for (size_t i = 0; i < declared.size(); ++i) {
            const std::string& d = declared[i];
            const std::string& r = popped[i];
            if (ClassHierarchy::is_primitive(d) || r.empty() || r == kTop)
                refined[i] = d;
            else if (r == "null")
                refined[i] = "null";
            else if (hierarchy_.assignable(d, r))
                refined[i] = r;
            else
                refined[i] = d;
        }
        (*recorder)[ins.offset] = std::move(refined);
    }

    const cf::MethodBody& body_;
    const cf::RawClass* pool_owner_;
    const ClassHierarchy& hierarchy_;
};

// Map from instruction offset to stream index.
std::map<uint32_t, size_t> index_by_offset(const cf::InstructionStream& stream)
{
    std::map<uint32_t, size_t> out;
    for (size_t i = 0; i < stream.size(); ++i)
        out.emplace(stream[i].offset, i);
    return out;
}

} // namespace

std::map<uint32_t, std::vector<std::string>> infer_argument_types(const cf::RawClass& cls,
                                                                  const cf::MethodBody& body,
                                                                  const ClassHierarchy& hierarchy, bool* bailed)
{
    if (bailed)
        *bailed = false;
    std::map<uint32_t, std::vector<std::string>> result;
    if (!body.has_code || body.instructions.empty())
        return result;

    Interpreter interp(body, hierarchy);
    interp.set_class(&cls);
    Cfg cfg = build_cfg(body);
    const cf::InstructionStream& stream = body.instructions;
    auto offset_index = index_by_offset(stream);

    try {
        std::map<uint32_t, Frame> in_state;
        std::map<uint32_t, bool> has_state;
        in_state[stream.front().offset] = interp.initial_frame();
        has_state[stream.front().offset] = true;

        auto merge_into = [&](uint32_t leader, const Frame& f, bool locals_only) {
            if (!has_state[leader]) {
                Frame init = f;
                if (locals_only) {
                    init.stack.clear();
                }
                in_state[leader] = std::move(init);
                has_state[leader] = true;
                return true;
            }
            return locals_only ? interp.merge_locals(in_state[leader], f) : interp.merge_frame(in_state[leader], f);
        };

        // Simulates one basic block; propagates to successors, returns true
        // if any successor state changed.
        auto simulate = [&](size_t block_idx, Interpreter::Recorder* recorder) {
            uint32_t leader = cfg.leaders[block_idx];
            if (!has_state[leader])
                return false;
            Frame f = in_state[leader];
            bool changed = false;
            size_t i = offset_index.at(leader);
            for (; i < stream.size(); ++i) {
                const cf::Instruction& ins = stream[i];
                if (ins.offset != leader && std::binary_search(cfg.leaders.begin(), cfg.leaders.end(), ins.offset))
                    break; // next block begins
                for (const cf::ExceptionEntry& e : body.exception_table) {
                    if (ins.offset >= e.start_pc && ins.offset < e.end_pc) {
                        Frame h;
                        h.locals = f.locals;
                        h.stack = {e.catch_type.empty() ? "java.lang.Throwable" : e.catch_type};
                        if (!has_state[e.handler_pc]) {
                            in_state[e.handler_pc] = h;
                            has_state[e.handler_pc] = true;
                            changed = true;
                        } else {
                            Frame& dst = in_state[e.handler_pc];
                            if (dst.stack.size() == 1) {
                                Frame tmp = dst;
                                Frame merged_src;
                                merged_src.stack = dst.stack;
                                merged_src.locals = h.locals;
                                if (interp.merge_frame(dst, merged_src))
                                    changed = true;
                                (void)tmp;
                            }
                        }
                    }
                }
                interp.exec(ins, f, recorder);
                uint8_t o = ins.opcode;
                bool last_in_block = (i + 1 >= stream.size())
                    || std::binary_search(cfg.leaders.begin(), cfg.leaders.end(), stream[i + 1].offset);
                if (ins.branch_target >= 0) {
                    if (merge_into(static_cast<uint32_t>(ins.branch_target), f, false))
                        changed = true;
                }
                if (ins.switch_default >= 0) {
                    if (merge_into(static_cast<uint32_t>(ins.switch_default), f, false))
                        changed = true;
                    for (const auto& [v, t] : ins.switch_pairs) {
                        if (merge_into(static_cast<uint32_t>(t), f, false))
                            changed = true;
                    }
                }
                if (last_in_block) {
                    if (!ends_flow(o) && i + 1 < stream.size()) {
                        if (merge_into(stream[i + 1].offset, f, false))
                            changed = true;
                    }
                    break;
                }
            }
            return changed;
        };

        // Worklist to fixpoint, then one recording pass from the final states.
        bool any_changed = true;
        int rounds = 0;
        while (any_changed && rounds < 64) {
            any_changed = false;
            for (size_t b = 0; b < cfg.leaders.size(); ++b) {
                if (simulate(b, nullptr))
                    any_changed = true;
            }
            ++rounds;
        }
        for (size_t b = 0; b < cfg.leaders.size(); ++b)
            simulate(b, &result);
    } catch (const Bail&) {
        if (bailed)
            *bailed = true;
        return {};
    }
    return result;
}

std::map<uint32_t, std::vector<std::string>> infer_argument_types(const cf::MethodBody& body,
                                                                  const ClassHierarchy& hierarchy, bool* bailed)
{
    // Standalone entry point: the owning class provides the constant pool.
    fail(ErrorKind::Internal, "infer_argument_types requires class context; use run_inference");
    (void)body;
    (void)hierarchy;
    (void)bailed;
}

namespace {

void extract_instruction_features(const cf::RawClass& cls, const cf::Instruction& ins, const MethodContext& ctx,
                                  int block_line, FeatureSet& out)
{
    const cf::ConstantPool& pool = cls.constant_pool;
    const ClassHierarchy& hierarchy = *ctx.hierarchy;
    uint8_t o = ins.opcode;

    if (o >= op::iconst_m1 && o <= op::iconst_5) {
        out.insert(make_literal("int", canonical_int(static_cast<int>(o) - 3)));
    } else if (o == op::bipush || o == op::sipush) {
        out.insert(make_literal("int", canonical_int(ins.imm)));
    } else if (o == op::lconst_0 || o == op::lconst_1) {
        out.insert(make_literal("long", canonical_int(o - op::lconst_0)));
    } else if (o >= op::fconst_0 && o <= op::fconst_2) {
        out.insert(make_literal("float", canonical_float(static_cast<float>(o - op::fconst_0))));
    } else if (o == op::dconst_0 || o == op::dconst_1) {
        out.insert(make_literal("double", canonical_double(o - op::dconst_0)));
    } else if (o == op::aconst_null) {
        out.insert(make_literal("null", "null"));
    } else if (o == op::ldc || o == op::ldc_w || o == op::ldc2_w) {
        const cf::ConstantEntry& e = pool.at(ins.cp_index);
        switch (e.tag) {
        case cf::CpTag::Integer: out.insert(make_literal("int", canonical_int(e.int_value))); break;
        case cf::CpTag::Long: out.insert(make_literal("long", canonical_int(e.long_value))); break;
        case cf::CpTag::Float: out.insert(make_literal("float", canonical_float(e.float_value))); break;
        case cf::CpTag::Double: out.insert(make_literal("double", canonical_double(e.double_value))); break;
        case cf::CpTag::String:
            out.insert(make_literal("string", escape_string_value(cf::decode_modified_utf8(pool.utf8(e.ref1)))));
            break;
        case cf::CpTag::Class:
            out.insert(make_literal("class", type_from_class_entry(pool.class_name(ins.cp_index))));
            break;
        default:
            break; // method handles/types carry no literal feature
        }
    } else if (o >= op::invokevirtual && o <= op::invokeinterface) {
        cf::MemberRef m = pool.member(ins.cp_index);
        if (is_excluded_invocation(m.owner, m.name))
            return;
        std::vector<std::string> args;
        auto it = ctx.refined_args.find(ins.offset);
        if (it != ctx.refined_args.end())
            args = it->second;
        else
            args = cf::parse_method_descriptor_params(m.descriptor);
        out.insert(make_invocation(m.owner, m.name, args));
    } else if (o == op::invokedynamic) {
        const cf::ConstantEntry& e = pool.at(ins.cp_index, cf::CpTag::InvokeDynamic);
        cf::NameAndType nt = pool.name_and_type(e.ref2);
        const cf::BootstrapMethod& bsm = cls.bootstrap_methods.at(e.ref1);
        const std::string& bsm_owner = bsm.handle.owner;
        if (bsm_owner == "java.lang.invoke.LambdaMetafactory") {
            out.insert(make_special("lambda"));
        } else if (bsm_owner == "java.lang.invoke.StringConcatFactory") {
            if (bsm.handle.name == "makeConcatWithConstants" && !bsm.arguments.empty()
                && bsm.arguments[0].kind == cf::BootstrapArgument::Kind::String) {
                // Literal chunks folded into the recipe become string literals;
                // \x02 slots consume trailing constant arguments.
                const std::string& recipe = bsm.arguments[0].text;
                size_t const_idx = 1;
                std::string chunk;
                auto flush = [&] {
                    if (!chunk.empty()) {
                        out.insert(make_literal("string", escape_string_value(chunk)));
                        chunk.clear();
                    }
                };
                for (char c : recipe) {
                    if (c == '\x01') {
                        flush();
                    } else if (c == '\x02') {
                        flush();
                        if (const_idx < bsm.arguments.size()) {
                            const cf::BootstrapArgument& a = bsm.arguments[const_idx++];
                            switch (a.kind) {
                            case cf::BootstrapArgument::Kind::String:
                                out.insert(make_literal("string", escape_string_value(a.text)));
                                break;
                            case cf::BootstrapArgument::Kind::Int:
                                out.insert(make_literal("int", canonical_int(a.int_value)));
                                break;
                            case cf::BootstrapArgument::Kind::Long:
                                out.insert(make_literal("long", canonical_int(a.int_value)));
                                break;
                            case cf::BootstrapArgument::Kind::Float:
                                out.insert(make_literal("float", canonical_float(static_cast<float>(a.fp_value))));
                                break;
                            case cf::BootstrapArgument::Kind::Double:
                                out.insert(make_literal("double", canonical_double(a.fp_value)));
                                break;
                            default:
                                break;
                            }
                        }
                    } else {
                        chunk += c;
                    }
                }
                flush();
            }
            // plain makeConcat mirrors the StringBuilder exclusion: no feature
        } else {
            out.insert(make_invocation(bsm_owner, nt.name, cf::parse_method_descriptor_params(nt.descriptor)));
        }
    } else if (o == op::getstatic) {
        cf::MemberRef m = pool.member(ins.cp_index);
        const TypeModel* owner = hierarchy.find(m.owner);
        if (!owner)
            return; // unknown owner: assume constant-like, mirror of source side
        const TypeModel::Field* fld = hierarchy.find_field(m.owner, m.name);
        if (!fld || (fld->is_static && fld->is_final))
            return;
        out.insert(make_field_access(false, m.owner, m.name));
    } else if (o == op::getfield) {
        cf::MemberRef m = pool.member(ins.cp_index);
        out.insert(make_field_access(false, m.owner, m.name));
    } else if (o == op::putstatic || o == op::putfield) {
        cf::MemberRef m = pool.member(ins.cp_index);
        out.insert(make_field_access(true, m.owner, m.name));
    } else if (o == op::newarray) {
        static const std::map<int, std::string> kinds = {{4, "boolean"}, {5, "char"},  {6, "float"}, {7, "double"},
                                                         {8, "byte"},    {9, "short"}, {10, "int"},  {11, "long"}};
        auto it = kinds.find(ins.imm);
        out.insert(make_array_creation(it == kinds.end() ? "int" : it->second, 1));
    } else if (o == op::anewarray) {
        out.insert(make_array_creation(type_from_class_entry(pool.class_name(ins.cp_index)), 1));
    } else if (o == op::multianewarray) {
        std::string full = type_from_class_entry(pool.class_name(ins.cp_index));
        std::string element = full;
        for (int i = 0; i < ins.dims && ClassHierarchy::is_array(element); ++i)
            element = element.substr(0, element.size() - 2);
        out.insert(make_array_creation(element, ins.dims));
    } else if (o == 120 || o == 121) {
        out.insert(make_special("shl"));
    } else if (o == 122 || o == 123) {
        out.insert(make_special("shr"));
    } else if (o == 124 || o == 125) {
        out.insert(make_special("ushr"));
    } else if (o == op::instanceof_) {
        out.insert(make_special("instanceof"));
    } else if (o == op::iinc) {
        out.insert(make_special(ins.imm < 0 ? "dec" : "inc"));
    } else if (o >= op::ireturn && o <= op::return_) {
        out.insert(make_special("return"));
    } else if (o == op::athrow) {
        out.insert(make_special("throw"));
    } else if (o == op::monitorenter || o == op::monitorexit) {
        out.insert(make_special("monitor"));
    } else if (o == op::tableswitch || o == op::lookupswitch) {
        for (const auto& [value, target] : ins.switch_pairs)
            out.insert(make_switch_label(value));
    } else if (is_conditional_branch(o)) {
        if (!ctx.loop_header_lines.count(block_line))
            out.insert(make_special("branch"));
    }
}

} // namespace

FeatureSet extract_block_features(const LogicalBlock& block, const MethodContext& ctx)
{
    FeatureSet out;
    const cf::InstructionStream& stream = ctx.body->instructions;
    for (size_t i = block.first; i < block.first + block.count; ++i)
        extract_instruction_features(*ctx.cls, stream[i], ctx, block.line, out);
    if (ctx.loop_header_lines.count(block.line))
        out.insert(make_special("loop"));
    return out;
}

std::vector<LogicalBlock> analyze_method(const cf::RawClass& cls, const cf::MethodBody& body,
                                         const ClassHierarchy& hierarchy)
{
    cf::LineMap lines(body);
    std::vector<LogicalBlock> blocks = split_blocks(body.instructions, lines);
    Cfg cfg = build_cfg(body);

    MethodContext ctx;
    ctx.cls = &cls;
    ctx.body = &body;
    ctx.hierarchy = &hierarchy;
    ctx.loop_header_lines = detect_loops(cfg, body.instructions, lines);
    bool bailed = false;
    ctx.refined_args = run_inference(cls, body, hierarchy, &bailed);

    for (LogicalBlock& b : blocks)
        b.features = extract_block_features(b, ctx);
    return blocks;
}

BinaryModel::BinaryModel(const std::map<std::string, std::vector<uint8_t>>& classes, cf::ParseOptions options)
{
    for (const auto& [name, bytes] : classes) {
        cf::RawClass cls = cf::parse_class(bytes, options);
        TypeModel model;
        model.name = cls.this_class;
        model.super = cls.super_class.empty() ? "java.lang.Object" : cls.super_class;
        model.interfaces = cls.interfaces;
        model.is_interface = cls.is_interface();
        for (const cf::FieldInfo& f : cls.fields) {
            TypeModel::Field fld;
            fld.name = f.name;
            fld.type = cf::parse_field_descriptor(f.descriptor);
            fld.is_static = (f.access_flags & cf::kAccStatic) != 0;
            fld.is_final = (f.access_flags & cf::kAccFinal) != 0;
            model.fields.push_back(std::move(fld));
        }
        for (const cf::MethodBody& m : cls.methods) {
            TypeModel::Method mm;
            mm.name = m.name;
            mm.params = cf::parse_method_descriptor_params(m.descriptor);
            mm.return_type = cf::parse_method_descriptor_return(m.descriptor);
            mm.is_static = (m.access_flags & cf::kAccStatic) != 0;
            model.methods.push_back(std::move(mm));
        }
        hierarchy_.add(std::move(model));
        classes_.emplace(name, std::move(cls));
    }
}

const cf::RawClass* BinaryModel::find(const std::string& name) const
{
    auto it = classes_.find(name);
    return it == classes_.end() ? nullptr : &it->second;
}

std::vector<std::string> BinaryModel::class_names() const
{
    std::vector<std::string> out;
    out.reserve(classes_.size());
    for (const auto& [name, cls] : classes_)
        out.push_back(name);
    return out;
}

std::vector<BlockEntry> BinaryModel::class_feature_sequence(const std::string& class_name) const
{
    std::vector<const cf::RawClass*> group;
    if (const cf::RawClass* main = find(class_name))
        group.push_back(main);
    std::string prefix = class_name + "$";
    for (const auto& [name, cls] : classes_) {
        if (name.size() > prefix.size() && name.compare(0, prefix.size(), prefix) == 0)
            group.push_back(&cls);
    }
    if (group.empty())
        fail(ErrorKind::TargetClassMissing, class_name + " not present in the target container");

    std::vector<BlockEntry> entries;
    for (const cf::RawClass* cls : group) {
        for (const cf::MethodBody& m : cls->methods) {
            if (!m.has_code)
                continue;
            for (const LogicalBlock& b : analyze_method(*cls, m, hierarchy_)) {
                if (!b.features.empty())
                    entries.push_back({b.line, b.features});
            }
        }
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const BlockEntry& a, const BlockEntry& b) { return a.line < b.line; });
    return entries;
}

} // namespace patchprobe::bc
