// SPDX-License-Identifier: Apache-2.0
#include "patchprobe/classfile.hpp"

#include <algorithm>
#include <array>
#include <cstring>

namespace patchprobe::cf {

namespace {

class ByteReader {
public:
    ByteReader(const uint8_t* data, size_t size) : data_(data), size_(size) {}

    size_t pos() const { return pos_; }
    size_t remaining() const { return size_ - pos_; }
    bool eof() const { return pos_ >= size_; }

    void require(size_t n) const
    {
        if (size_ - pos_ < n)
            fail(ErrorKind::Truncated, "unexpected end of class file at offset " + std::to_string(pos_));
    }

    uint8_t u1()
    {
        require(1);
        return data_[pos_++];
    }
    uint16_t u2()
    {
        require(2);
        uint16_t v = static_cast<uint16_t>((data_[pos_] << 8) | data_[pos_ + 1]);
        pos_ += 2;
        return v;
    }
    uint32_t u4()
    {
        require(4);
        uint32_t v = (static_cast<uint32_t>(data_[pos_]) << 24) | (static_cast<uint32_t>(data_[pos_ + 1]) << 16)
            | (static_cast<uint32_t>(data_[pos_ + 2]) << 8) | static_cast<uint32_t>(data_[pos_ + 3]);
        pos_ += 4;
        return v;
    }
    std::string bytes(size_t n)
    {
        require(n);
        std::string out(reinterpret_cast<const char*>(data_ + pos_), n);
        pos_ += n;
        return out;
    }
    void skip(size_t n)
    {
        require(n);
        pos_ += n;
    }

private:
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

std::string dotted(const std::string& internal)
{
    std::string out = internal;
    std::replace(out.begin(), out.end(), '/', '.');
    return out;
}

// Operand layout families for the fixed-size portion of the opcode table.
enum class OpFormat : uint8_t {
    None,
    SByte,       // bipush
    SShort,      // sipush
    Cp8,         // ldc
    Cp16,        // ldc_w, ldc2_w, member refs, new, checkcast, instanceof, anewarray
    Local8,      // loads/stores/ret
    Iinc,        // local + signed delta
    Branch16,
    Branch32,
    InvokeInterface, // cp16 + count + 0
    InvokeDynamic,   // cp16 + 0 + 0
    NewArray,        // atype byte
    MultiANewArray,  // cp16 + dims
    TableSwitch,
    LookupSwitch,
    Wide,
    Invalid,
};

struct OpInfo {
    const char* name;
    OpFormat format;
};

constexpr std::array<OpInfo, 202> kOps = {{
    {"nop", OpFormat::None}, {"aconst_null", OpFormat::None}, {"iconst_m1", OpFormat::None},
    {"iconst_0", OpFormat::None}, {"iconst_1", OpFormat::None}, {"iconst_2", OpFormat::None},
    {"iconst_3", OpFormat::None}, {"iconst_4", OpFormat::None}, {"iconst_5", OpFormat::None},
    {"lconst_0", OpFormat::None}, {"lconst_1", OpFormat::None}, {"fconst_0", OpFormat::None},
    {"fconst_1", OpFormat::None}, {"fconst_2", OpFormat::None}, {"dconst_0", OpFormat::None},
    {"dconst_1", OpFormat::None}, {"bipush", OpFormat::SByte}, {"sipush", OpFormat::SShort},
    {"ldc", OpFormat::Cp8}, {"ldc_w", OpFormat::Cp16}, {"ldc2_w", OpFormat::Cp16},
    {"iload", OpFormat::Local8}, {"lload", OpFormat::Local8}, {"fload", OpFormat::Local8},
    {"dload", OpFormat::Local8}, {"aload", OpFormat::Local8},
    {"iload_0", OpFormat::None}, {"iload_1", OpFormat::None}, {"iload_2", OpFormat::None}, {"iload_3", OpFormat::None},
    {"lload_0", OpFormat::None}, {"lload_1", OpFormat::None}, {"lload_2", OpFormat::None}, {"lload_3", OpFormat::None},
    {"fload_0", OpFormat::None}, {"fload_1", OpFormat::None}, {"fload_2", OpFormat::None}, {"fload_3", OpFormat::None},
    {"dload_0", OpFormat::None}, {"dload_1", OpFormat::None}, {"dload_2", OpFormat::None}, {"dload_3", OpFormat::None},
    {"aload_0", OpFormat::None}, {"aload_1", OpFormat::None}, {"aload_2", OpFormat::None}, {"aload_3", OpFormat::None},
    {"iaload", OpFormat::None}, {"laload", OpFormat::None}, {"faload", OpFormat::None}, {"daload", OpFormat::None},
    {"aaload", OpFormat::None}, {"baload", OpFormat::None}, {"caload", OpFormat::None}, {"saload", OpFormat::None},
    {"istore", OpFormat::Local8}, {"lstore", OpFormat::Local8}, {"fstore", OpFormat::Local8},
    {"dstore", OpFormat::Local8}, {"astore", OpFormat::Local8},
    {"istore_0", OpFormat::None}, {"istore_1", OpFormat::None}, {"istore_2", OpFormat::None}, {"istore_3", OpFormat::None},
    {"lstore_0", OpFormat::None}, {"lstore_1", OpFormat::None}, {"lstore_2", OpFormat::None}, {"lstore_3", OpFormat::None},
    {"fstore_0", OpFormat::None}, {"fstore_1", OpFormat::None}, {"fstore_2", OpFormat::None}, {"fstore_3", OpFormat::None},
    {"dstore_0", OpFormat::None}, {"dstore_1", OpFormat::None}, {"dstore_2", OpFormat::None}, {"dstore_3", OpFormat::None},
    {"astore_0", OpFormat::None}, {"astore_1", OpFormat::None}, {"astore_2", OpFormat::None}, {"astore_3", OpFormat::None},
    {"iastore", OpFormat::None}, {"lastore", OpFormat::None}, {"fastore", OpFormat::None}, {"dastore", OpFormat::None},
    {"aastore", OpFormat::None}, {"bastore", OpFormat::None}, {"castore", OpFormat::None}, {"sastore", OpFormat::None},
    {"pop", OpFormat::None}, {"pop2", OpFormat::None}, {"dup", OpFormat::None}, {"dup_x1", OpFormat::None},
    {"dup_x2", OpFormat::None}, {"dup2", OpFormat::None}, {"dup2_x1", OpFormat::None}, {"dup2_x2", OpFormat::None},
    {"swap", OpFormat::None},
    {"iadd", OpFormat::None}, {"ladd", OpFormat::None}, {"fadd", OpFormat::None}, {"dadd", OpFormat::None},
    {"isub", OpFormat::None}, {"lsub", OpFormat::None}, {"fsub", OpFormat::None}, {"dsub", OpFormat::None},
    {"imul", OpFormat::None}, {"lmul", OpFormat::None}, {"fmul", OpFormat::None}, {"dmul", OpFormat::None},
    {"idiv", OpFormat::None}, {"ldiv", OpFormat::None}, {"fdiv", OpFormat::None}, {"ddiv", OpFormat::None},
    {"irem", OpFormat::None}, {"lrem", OpFormat::None}, {"frem", OpFormat::None}, {"drem", OpFormat::None},
    {"ineg", OpFormat::None}, {"lneg", OpFormat::None}, {"fneg", OpFormat::None}, {"dneg", OpFormat::None},
    {"ishl", OpFormat::None}, {"lshl", OpFormat::None}, {"ishr", OpFormat::None}, {"lshr", OpFormat::None},
    {"iushr", OpFormat::None}, {"lushr", OpFormat::None},
    {"iand", OpFormat::None}, {"land", OpFormat::None}, {"ior", OpFormat::None}, {"lor", OpFormat::None},
    {"ixor", OpFormat::None}, {"lxor", OpFormat::None},
    {"iinc", OpFormat::Iinc},
    {"i2l", OpFormat::None}, {"i2f", OpFormat::None}, {"i2d", OpFormat::None}, {"l2i", OpFormat::None},
    {"l2f", OpFormat::None}, {"l2d", OpFormat::None}, {"f2i", OpFormat::None}, {"f2l", OpFormat::None},
    {"f2d", OpFormat::None}, {"d2i", OpFormat::None}, {"d2l", OpFormat::None}, {"d2f", OpFormat::None},
    {"i2b", OpFormat::None}, {"i2c", OpFormat::None}, {"i2s", OpFormat::None},
    {"lcmp", OpFormat::None}, {"fcmpl", OpFormat::None}, {"fcmpg", OpFormat::None},
    {"dcmpl", OpFormat::None}, {"dcmpg", OpFormat::None},
    {"ifeq", OpFormat::Branch16}, {"ifne", OpFormat::Branch16}, {"iflt", OpFormat::Branch16},
    {"ifge", OpFormat::Branch16}, {"ifgt", OpFormat::Branch16}, {"ifle", OpFormat::Branch16},
    {"if_icmpeq", OpFormat::Branch16}, {"if_icmpne", OpFormat::Branch16}, {"if_icmplt", OpFormat::Branch16},
    {"if_icmpge", OpFormat::Branch16}, {"if_icmpgt", OpFormat::Branch16}, {"if_icmple", OpFormat::Branch16},
    {"if_acmpeq", OpFormat::Branch16}, {"if_acmpne", OpFormat::Branch16},
    {"goto", OpFormat::Branch16}, {"jsr", OpFormat::Branch16}, {"ret", OpFormat::Local8},
    {"tableswitch", OpFormat::TableSwitch}, {"lookupswitch", OpFormat::LookupSwitch},
    {"ireturn", OpFormat::None}, {"lreturn", OpFormat::None}, {"freturn", OpFormat::None},
    {"dreturn", OpFormat::None}, {"areturn", OpFormat::None}, {"return", OpFormat::None},
    {"getstatic", OpFormat::Cp16}, {"putstatic", OpFormat::Cp16}, {"getfield", OpFormat::Cp16},
    {"putfield", OpFormat::Cp16},
    {"invokevirtual", OpFormat::Cp16}, {"invokespecial", OpFormat::Cp16}, {"invokestatic", OpFormat::Cp16},
    {"invokeinterface", OpFormat::InvokeInterface}, {"invokedynamic", OpFormat::InvokeDynamic},
    {"new", OpFormat::Cp16}, {"newarray", OpFormat::NewArray}, {"anewarray", OpFormat::Cp16},
    {"arraylength", OpFormat::None}, {"athrow", OpFormat::None},
    {"checkcast", OpFormat::Cp16}, {"instanceof", OpFormat::Cp16},
    {"monitorenter", OpFormat::None}, {"monitorexit", OpFormat::None},
    {"wide", OpFormat::Wide}, {"multianewarray", OpFormat::MultiANewArray},
    {"ifnull", OpFormat::Branch16}, {"ifnonnull", OpFormat::Branch16},
    {"goto_w", OpFormat::Branch32}, {"jsr_w", OpFormat::Branch32},
}};

} // namespace

const char* opcode_name(uint8_t opcode)
{
    if (opcode >= kOps.size())
        return "<invalid>";
    return kOps[opcode].name;
}

const ConstantEntry& ConstantPool::at(uint16_t index) const
{
    if (!present(index))
        fail(ErrorKind::MalformedPool, "constant-pool index " + std::to_string(index) + " out of range or unusable");
    return *entries_[index];
}

const ConstantEntry& ConstantPool::at(uint16_t index, CpTag expected) const
{
    const ConstantEntry& e = at(index);
    if (e.tag != expected)
        fail(ErrorKind::MalformedPool,
             "constant-pool index " + std::to_string(index) + " has tag " + std::to_string(static_cast<int>(e.tag))
                 + ", expected " + std::to_string(static_cast<int>(expected)));
    return e;
}

const std::string& ConstantPool::utf8(uint16_t index) const
{
    return at(index, CpTag::Utf8).utf8;
}

std::string ConstantPool::class_name(uint16_t index) const
{
    return dotted(utf8(at(index, CpTag::Class).ref1));
}

NameAndType ConstantPool::name_and_type(uint16_t index) const
{
    const ConstantEntry& e = at(index, CpTag::NameAndType);
    return {utf8(e.ref1), utf8(e.ref2)};
}

MemberRef ConstantPool::member(uint16_t index) const
{
    const ConstantEntry& e = at(index);
    if (e.tag != CpTag::Fieldref && e.tag != CpTag::Methodref && e.tag != CpTag::InterfaceMethodref)
        fail(ErrorKind::MalformedPool, "constant-pool index " + std::to_string(index) + " is not a member reference");
    NameAndType nt = name_and_type(e.ref2);
    return {class_name(e.ref1), nt.name, nt.descriptor};
}

const MethodBody* RawClass::find_method(const std::string& name, const std::string& descriptor) const
{
    for (const MethodBody& m : methods) {
        if (m.name == name && m.descriptor == descriptor)
            return &m;
    }
    return nullptr;
}

InstructionStream decode_instructions(const std::vector<uint8_t>& code)
{
    InstructionStream out;
    size_t pos = 0;
    const size_t len = code.size();

    auto need = [&](size_t n, uint32_t at) {
        if (len - pos < n)
            fail(ErrorKind::Truncated, "code ends inside instruction at offset " + std::to_string(at));
    };
    auto rd_u1 = [&] { return code[pos++]; };
    auto rd_u2 = [&] {
        uint16_t v = static_cast<uint16_t>((code[pos] << 8) | code[pos + 1]);
        pos += 2;
        return v;
    };
    auto rd_s2 = [&] { return static_cast<int16_t>(rd_u2()); };
    auto rd_s4 = [&] {
        int32_t v = static_cast<int32_t>((static_cast<uint32_t>(code[pos]) << 24)
            | (static_cast<uint32_t>(code[pos + 1]) << 16) | (static_cast<uint32_t>(code[pos + 2]) << 8)
            | static_cast<uint32_t>(code[pos + 3]));
        pos += 4;
        return v;
    };

    while (pos < len) {
        Instruction ins;
        ins.offset = static_cast<uint32_t>(pos);
        uint8_t op = code[pos++];
        OpFormat fmt = op < kOps.size() ? kOps[op].format : OpFormat::Invalid;
        if (fmt == OpFormat::Invalid)
            fail(ErrorKind::UnknownOpcode, "opcode " + std::to_string(op) + " at offset " + std::to_string(ins.offset));

        if (fmt == OpFormat::Wide) {
            // Decoded as a single logical instruction carrying the base opcode.
            need(1, ins.offset);
            uint8_t base = rd_u1();
            ins.wide = true;
            ins.opcode = base;
            if (base == 132) { // iinc
                need(4, ins.offset);
                ins.local = rd_u2();
                ins.imm = rd_s2();
            } else if ((base >= 21 && base <= 25) || (base >= 54 && base <= 58) || base == 169) {
                need(2, ins.offset);
                ins.local = rd_u2();
            } else {
                fail(ErrorKind::UnknownOpcode, "wide prefix before opcode " + std::to_string(base));
            }
            ins.length = static_cast<uint32_t>(pos - ins.offset);
            out.push_back(std::move(ins));
            continue;
        }

        ins.opcode = op;
        switch (fmt) {
        case OpFormat::None:
            break;
        case OpFormat::SByte:
            need(1, ins.offset);
            ins.imm = static_cast<int8_t>(rd_u1());
            break;
        case OpFormat::SShort:
            need(2, ins.offset);
            ins.imm = rd_s2();
            break;
        case OpFormat::Cp8:
            need(1, ins.offset);
            ins.cp_index = rd_u1();
            break;
        case OpFormat::Cp16:
            need(2, ins.offset);
            ins.cp_index = rd_u2();
            break;
        case OpFormat::Local8:
            need(1, ins.offset);
            ins.local = rd_u1();
            break;
        case OpFormat::Iinc:
            need(2, ins.offset);
            ins.local = rd_u1();
            ins.imm = static_cast<int8_t>(rd_u1());
            break;
        case OpFormat::Branch16:
            need(2, ins.offset);
            ins.branch_target = static_cast<int32_t>(ins.offset) + rd_s2();
            break;
        case OpFormat::Branch32:
            need(4, ins.offset);
            ins.branch_target = static_cast<int32_t>(ins.offset) + rd_s4();
            break;
        case OpFormat::InvokeInterface:
            need(4, ins.offset);
            ins.cp_index = rd_u2();
            ins.imm = rd_u1();
            rd_u1(); // must-be-zero pad
            break;
        case OpFormat::InvokeDynamic:
            need(4, ins.offset);
            ins.cp_index = rd_u2();
            rd_u2(); // must-be-zero pad
            break;
        case OpFormat::NewArray:
            need(1, ins.offset);
            ins.imm = rd_u1();
            break;
        case OpFormat::MultiANewArray:
            need(3, ins.offset);
            ins.cp_index = rd_u2();
            ins.dims = rd_u1();
            break;
        case OpFormat::TableSwitch: {
            size_t pad = (4 - (pos % 4)) % 4;
            need(pad + 12, ins.offset);
            pos += pad;
            ins.switch_default = static_cast<int32_t>(ins.offset) + rd_s4();
            int32_t low = rd_s4();
            int32_t high = rd_s4();
            if (low > high)
                fail(ErrorKind::Truncated, "tableswitch low > high at offset " + std::to_string(ins.offset));
            int64_t n = static_cast<int64_t>(high) - low + 1;
            if (n > static_cast<int64_t>(len / 4) + 1)
                fail(ErrorKind::Truncated, "tableswitch entry count exceeds code size");
            need(static_cast<size_t>(n) * 4, ins.offset);
            for (int64_t i = 0; i < n; ++i)
                ins.switch_pairs.emplace_back(static_cast<int32_t>(low + i), static_cast<int32_t>(ins.offset) + rd_s4());
            break;
        }
        case OpFormat::LookupSwitch: {
            size_t pad = (4 - (pos % 4)) % 4;
            need(pad + 8, ins.offset);
            pos += pad;
            ins.switch_default = static_cast<int32_t>(ins.offset) + rd_s4();
            int32_t npairs = rd_s4();
            if (npairs < 0 || static_cast<size_t>(npairs) > len / 8 + 1)
                fail(ErrorKind::Truncated, "lookupswitch pair count exceeds code size");
            need(static_cast<size_t>(npairs) * 8, ins.offset);
            for (int32_t i = 0; i < npairs; ++i) {
                int32_t key = rd_s4();
                ins.switch_pairs.emplace_back(key, static_cast<int32_t>(ins.offset) + rd_s4());
            }
            break;
        }
        case OpFormat::Wide:
        case OpFormat::Invalid:
            break;
        }
        ins.length = static_cast<uint32_t>(pos - ins.offset);
        out.push_back(std::move(ins));
    }

    // Validate branch targets against decoded instruction boundaries.
    std::vector<uint32_t> offsets;
    offsets.reserve(out.size());
    for (const Instruction& i : out)
        offsets.push_back(i.offset);
    auto check_target = [&](int32_t target, uint32_t from) {
        if (target < 0 || !std::binary_search(offsets.begin(), offsets.end(), static_cast<uint32_t>(target)))
            fail(ErrorKind::BranchOutOfRange,
                 "branch from offset " + std::to_string(from) + " to invalid offset " + std::to_string(target));
    };
    for (const Instruction& i : out) {
        if (i.branch_target >= 0 || (i.opcode == 167 || i.opcode == 200)) {
            if (i.branch_target >= 0)
                check_target(i.branch_target, i.offset);
        }
        if (i.switch_default >= 0)
            check_target(i.switch_default, i.offset);
        for (const auto& [value, target] : i.switch_pairs)
            check_target(target, i.offset);
    }
    return out;
}

namespace {

void validate_pool(const ConstantPool& pool)
{
    for (uint16_t i = 1; i < pool.count(); ++i) {
        if (!pool.present(i))
            continue;
        const ConstantEntry& e = pool.at(i);
        switch (e.tag) {
        case CpTag::Class:
        case CpTag::Module:
        case CpTag::Package:
        case CpTag::MethodType:
        case CpTag::String:
            pool.at(e.ref1, CpTag::Utf8);
            break;
        case CpTag::Fieldref:
        case CpTag::Methodref:
        case CpTag::InterfaceMethodref:
            pool.at(e.ref1, CpTag::Class);
            pool.at(e.ref2, CpTag::NameAndType);
            break;
        case CpTag::NameAndType:
            pool.at(e.ref1, CpTag::Utf8);
            pool.at(e.ref2, CpTag::Utf8);
            break;
        case CpTag::MethodHandle: {
            const ConstantEntry& ref = pool.at(e.ref2);
            if (ref.tag != CpTag::Fieldref && ref.tag != CpTag::Methodref && ref.tag != CpTag::InterfaceMethodref)
                fail(ErrorKind::MalformedPool, "MethodHandle reference is not a member ref");
            break;
        }
        case CpTag::Dynamic:
        case CpTag::InvokeDynamic:
            pool.at(e.ref2, CpTag::NameAndType);
            break;
        default:
            break;
        }
    }
}

ConstantPool parse_pool(ByteReader& r)
{
    uint16_t count = r.u2();
    ConstantPool pool;
    pool.resize(count);
    for (uint16_t i = 1; i < count; ++i) {
        uint8_t tag = r.u1();
        ConstantEntry e;
        e.tag = static_cast<CpTag>(tag);
        switch (e.tag) {
        case CpTag::Utf8: {
            uint16_t n = r.u2();
            e.utf8 = r.bytes(n);
            decode_modified_utf8(e.utf8); // validate
            break;
        }
        case CpTag::Integer:
            e.int_value = static_cast<int32_t>(r.u4());
            break;
        case CpTag::Float: {
            uint32_t bits = r.u4();
            std::memcpy(&e.float_value, &bits, 4);
            break;
        }
        case CpTag::Long: {
            uint64_t hi = r.u4();
            uint64_t lo = r.u4();
            e.long_value = static_cast<int64_t>((hi << 32) | lo);
            break;
        }
        case CpTag::Double: {
            uint64_t hi = r.u4();
            uint64_t lo = r.u4();
            uint64_t bits = (hi << 32) | lo;
            std::memcpy(&e.double_value, &bits, 8);
            break;
        }
        case CpTag::Class:
        case CpTag::String:
        case CpTag::MethodType:
        case CpTag::Module:
        case CpTag::Package:
            e.ref1 = r.u2();
            break;
        case CpTag::Fieldref:
        case CpTag::Methodref:
        case CpTag::InterfaceMethodref:
        case CpTag::NameAndType:
        case CpTag::Dynamic:
        case CpTag::InvokeDynamic:
            e.ref1 = r.u2();
            e.ref2 = r.u2();
            break;
        case CpTag::MethodHandle:
            e.ref1 = r.u1();
            e.ref2 = r.u2();
            break;
        default:
            // Unknown future kinds would corrupt index arithmetic if skipped.
            fail(ErrorKind::MalformedPool, "unknown constant-pool tag " + std::to_string(tag));
        }
        pool.set(i, std::move(e));
        if (e.tag == CpTag::Long || e.tag == CpTag::Double)
            ++i; // second slot unusable
    }
    validate_pool(pool);
    return pool;
}

struct AttrHeader {
    std::string name;
    uint32_t length;
};

AttrHeader read_attr_header(ByteReader& r, const ConstantPool& pool)
{
    uint16_t name_index = r.u2();
    uint32_t length = r.u4();
    if (length > r.remaining())
        fail(ErrorKind::Truncated, "attribute length exceeds remaining bytes");
    return {pool.utf8(name_index), length};
}

void parse_code_attribute(ByteReader& r, const ConstantPool& pool, MethodBody& body)
{
    body.has_code = true;
    body.max_stack = r.u2();
    body.max_locals = r.u2();
    uint32_t code_length = r.u4();
    if (code_length > r.remaining())
        fail(ErrorKind::Truncated, "code length exceeds remaining bytes");
    std::string raw = r.bytes(code_length);
    body.code.assign(raw.begin(), raw.end());
    body.instructions = decode_instructions(body.code);

    uint16_t exc_count = r.u2();
    for (uint16_t i = 0; i < exc_count; ++i) {
        ExceptionEntry e;
        e.start_pc = r.u2();
        e.end_pc = r.u2();
        e.handler_pc = r.u2();
        uint16_t type_index = r.u2();
        if (type_index != 0)
            e.catch_type = pool.class_name(type_index);
        if (e.start_pc > code_length || e.end_pc > code_length || e.handler_pc >= std::max<uint32_t>(code_length, 1))
            fail(ErrorKind::Truncated, "exception-table offsets outside code array");
        body.exception_table.push_back(std::move(e));
    }

    uint16_t attr_count = r.u2();
    for (uint16_t i = 0; i < attr_count; ++i) {
        AttrHeader h = read_attr_header(r, pool);
        if (h.name == "LineNumberTable") {
            uint16_t n = r.u2();
            for (uint16_t k = 0; k < n; ++k) {
                LineEntry le;
                le.start_pc = r.u2();
                le.line = r.u2();
                if (le.start_pc > code_length)
                    fail(ErrorKind::Truncated, "line-table offset outside code array");
                body.line_table.push_back(le);
            }
            body.line_table_present = true;
        } else {
            r.skip(h.length);
        }
    }
}

BootstrapArgument decode_bootstrap_argument(const ConstantPool& pool, uint16_t index)
{
    BootstrapArgument arg;
    const ConstantEntry& e = pool.at(index);
    switch (e.tag) {
    case CpTag::Integer:
        arg.kind = BootstrapArgument::Kind::Int;
        arg.int_value = e.int_value;
        break;
    case CpTag::Long:
        arg.kind = BootstrapArgument::Kind::Long;
        arg.int_value = e.long_value;
        break;
    case CpTag::Float:
        arg.kind = BootstrapArgument::Kind::Float;
        arg.fp_value = e.float_value;
        break;
    case CpTag::Double:
        arg.kind = BootstrapArgument::Kind::Double;
        arg.fp_value = e.double_value;
        break;
    case CpTag::String:
        arg.kind = BootstrapArgument::Kind::String;
        arg.text = decode_modified_utf8(pool.utf8(e.ref1));
        break;
    case CpTag::Class:
        arg.kind = BootstrapArgument::Kind::Class;
        arg.text = pool.class_name(index);
        break;
    case CpTag::MethodHandle: {
        arg.kind = BootstrapArgument::Kind::MethodHandle;
        arg.handle = pool.member(e.ref2);
        break;
    }
    case CpTag::MethodType:
        arg.kind = BootstrapArgument::Kind::MethodType;
        arg.text = pool.utf8(e.ref1);
        break;
    case CpTag::Dynamic:
        arg.kind = BootstrapArgument::Kind::Dynamic;
        break;
    default:
        fail(ErrorKind::MalformedPool, "invalid bootstrap argument kind");
    }
    return arg;
}

} // namespace

RawClass parse_class(const std::vector<uint8_t>& bytes, const ParseOptions& options)
{
    ByteReader r(bytes.data(), bytes.size());
    RawClass cls;
    cls.magic = r.u4();
    if (cls.magic != 0xCAFEBABEu)
        fail(ErrorKind::BadMagic, "first four bytes are not 0xCAFEBABE");
    cls.minor_version = r.u2();
    cls.major_version = r.u2();
    if (cls.major_version > options.max_major_version)
        fail(ErrorKind::UnsupportedVersion,
             "class-file major version " + std::to_string(cls.major_version) + " exceeds configured maximum "
                 + std::to_string(options.max_major_version));

    cls.constant_pool = parse_pool(r);
    const ConstantPool& pool = cls.constant_pool;

    cls.access_flags = r.u2();
    cls.this_class = pool.class_name(r.u2());
    uint16_t super_index = r.u2();
    if (super_index != 0)
        cls.super_class = pool.class_name(super_index);

    uint16_t iface_count = r.u2();
    for (uint16_t i = 0; i < iface_count; ++i)
        cls.interfaces.push_back(pool.class_name(r.u2()));

    uint16_t field_count = r.u2();
    for (uint16_t i = 0; i < field_count; ++i) {
        FieldInfo f;
        f.access_flags = r.u2();
        f.name = pool.utf8(r.u2());
        f.descriptor = pool.utf8(r.u2());
        parse_field_descriptor(f.descriptor);
        uint16_t attr_count = r.u2();
        for (uint16_t k = 0; k < attr_count; ++k) {
            AttrHeader h = read_attr_header(r, pool);
            r.skip(h.length);
        }
        cls.fields.push_back(std::move(f));
    }

    uint16_t method_count = r.u2();
    for (uint16_t i = 0; i < method_count; ++i) {
        MethodBody m;
        m.owner = cls.this_class;
        m.access_flags = r.u2();
        m.name = pool.utf8(r.u2());
        m.descriptor = pool.utf8(r.u2());
        parse_method_descriptor_params(m.descriptor);
        uint16_t attr_count = r.u2();
        for (uint16_t k = 0; k < attr_count; ++k) {
            AttrHeader h = read_attr_header(r, pool);
            if (h.name == "Code") {
                if (m.has_code)
                    fail(ErrorKind::MalformedPool, "duplicate Code attribute");
                size_t end = r.pos() + h.length;
                parse_code_attribute(r, pool, m);
                if (r.pos() != end)
                    fail(ErrorKind::Truncated, "Code attribute length mismatch");
            } else {
                r.skip(h.length);
            }
        }
        cls.methods.push_back(std::move(m));
    }

    uint16_t attr_count = r.u2();
    for (uint16_t i = 0; i < attr_count; ++i) {
        AttrHeader h = read_attr_header(r, pool);
        if (h.name == "BootstrapMethods") {
            uint16_t n = r.u2();
            for (uint16_t k = 0; k < n; ++k) {
                BootstrapMethod bm;
                uint16_t handle_index = r.u2();
                const ConstantEntry& he = pool.at(handle_index, CpTag::MethodHandle);
                bm.handle_kind = static_cast<uint8_t>(he.ref1);
                bm.handle = pool.member(he.ref2);
                uint16_t argc = r.u2();
                for (uint16_t a = 0; a < argc; ++a)
                    bm.arguments.push_back(decode_bootstrap_argument(pool, r.u2()));
                cls.bootstrap_methods.push_back(std::move(bm));
            }
        } else {
            r.skip(h.length);
        }
    }

    // Cross-check invokedynamic bootstrap indices now that the table is known.
    for (const MethodBody& m : cls.methods) {
        for (const Instruction& ins : m.instructions) {
            if (ins.opcode == 186) {
                const ConstantEntry& e = pool.at(ins.cp_index, CpTag::InvokeDynamic);
                if (e.ref1 >= cls.bootstrap_methods.size())
                    fail(ErrorKind::MalformedPool, "invokedynamic bootstrap index out of range");
            }
        }
    }
    return cls;
}

LineMap::LineMap(const MethodBody& body)
{
    if (!body.has_code)
        fail(ErrorKind::Internal, "LineMap requires a method with code");
    if (!body.line_table_present)
        fail(ErrorKind::StrippedDebugInfo,
             "no LineNumberTable for " + body.owner + "." + body.name + body.descriptor);
    table_ = body.line_table;
    std::stable_sort(table_.begin(), table_.end(),
                     [](const LineEntry& a, const LineEntry& b) { return a.start_pc < b.start_pc; });
}

int LineMap::line_at(uint32_t offset) const
{
    int line = -1;
    for (const LineEntry& e : table_) {
        if (e.start_pc <= offset)
            line = e.line;
        else
            break;
    }
    if (line < 0 && !table_.empty())
        line = table_.front().line;
    return line;
}

std::string decode_modified_utf8(const std::string& bytes)
{
    std::string out;
    out.reserve(bytes.size());
    size_t i = 0;
    const size_t n = bytes.size();
    auto bad = [&] { fail(ErrorKind::MalformedPool, "invalid modified UTF-8 in constant pool"); };
    while (i < n) {
        uint8_t a = static_cast<uint8_t>(bytes[i]);
        if (a == 0x00 || a >= 0xF0) {
            bad();
        } else if (a < 0x80) {
            out.push_back(static_cast<char>(a));
            ++i;
        } else if ((a & 0xE0) == 0xC0) {
            if (i + 1 >= n || (static_cast<uint8_t>(bytes[i + 1]) & 0xC0) != 0x80)
                bad();
            uint8_t b = static_cast<uint8_t>(bytes[i + 1]);
            uint32_t cp = ((a & 0x1Fu) << 6) | (b & 0x3Fu);
            if (cp == 0) {
                out.push_back('\0'); // 0xC0 0x80 encodes NUL
            } else {
                out.push_back(static_cast<char>(a));
                out.push_back(static_cast<char>(b));
            }
            i += 2;
        } else if ((a & 0xF0) == 0xE0) {
            if (i + 2 >= n || (static_cast<uint8_t>(bytes[i + 1]) & 0xC0) != 0x80
                || (static_cast<uint8_t>(bytes[i + 2]) & 0xC0) != 0x80)
                bad();
            uint8_t b = static_cast<uint8_t>(bytes[i + 1]);
            uint8_t c = static_cast<uint8_t>(bytes[i + 2]);
            uint32_t u = ((a & 0x0Fu) << 12) | ((b & 0x3Fu) << 6) | (c & 0x3Fu);
            // Surrogate pairs use the six-byte form; recombine into one code point.
            if (u >= 0xD800 && u <= 0xDBFF && i + 5 < n) {
                uint8_t d = static_cast<uint8_t>(bytes[i + 3]);
                uint8_t e = static_cast<uint8_t>(bytes[i + 4]);
                uint8_t f = static_cast<uint8_t>(bytes[i + 5]);
                if (d == 0xED && (e & 0xF0) == 0xB0 && (f & 0xC0) == 0x80) {
                    uint32_t lo = ((e & 0x0Fu) << 6) | (f & 0x3Fu);
                    uint32_t cp = 0x10000 + (((u - 0xD800) & 0x3FF) << 10) + lo;
                    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
                    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
                    i += 6;
                    continue;
                }
            }
            out.push_back(static_cast<char>(a));
            out.push_back(static_cast<char>(b));
            out.push_back(static_cast<char>(c));
            i += 3;
        } else {
            bad();
        }
    }
    return out;
}

std::string encode_modified_utf8(const std::string& utf8)
{
    std::string out;
    out.reserve(utf8.size());
    size_t i = 0;
    const size_t n = utf8.size();
    while (i < n) {
        uint8_t a = static_cast<uint8_t>(utf8[i]);
        if (a == 0x00) {
            out.push_back(static_cast<char>(0xC0));
            out.push_back(static_cast<char>(0x80));
            ++i;
        } else if (a < 0xF0) {
            out.push_back(static_cast<char>(a));
            ++i;
        } else {
            // Four-byte UTF-8 becomes a surrogate pair in the six-byte form.
            if (i + 3 >= n)
                fail(ErrorKind::Internal, "truncated UTF-8 while encoding");
            uint32_t cp = ((a & 0x07u) << 18) | ((static_cast<uint8_t>(utf8[i + 1]) & 0x3Fu) << 12)
                | ((static_cast<uint8_t>(utf8[i + 2]) & 0x3Fu) << 6) | (static_cast<uint8_t>(utf8[i + 3]) & 0x3Fu);
            uint32_t hi = 0xD800 + ((cp - 0x10000) >> 10);
            uint32_t lo = 0xDC00 + ((cp - 0x10000) & 0x3FF);
            for (uint32_t u : {hi, lo}) {
                out.push_back(static_cast<char>(0xE0 | (u >> 12)));
                out.push_back(static_cast<char>(0x80 | ((u >> 6) & 0x3F)));
                out.push_back(static_cast<char>(0x80 | (u & 0x3F)));
            }
            i += 4;
        }
    }
    return out;
}

namespace {

std::string parse_type_at(const std::string& d, size_t& i)
{
    if (i >= d.size())
        fail(ErrorKind::MalformedPool, "truncated type descriptor: " + d);
    int dims = 0;
    while (i < d.size() && d[i] == '[') {
        ++dims;
        ++i;
    }
    if (i >= d.size())
        fail(ErrorKind::MalformedPool, "truncated type descriptor: " + d);
    std::string base;
    switch (d[i]) {
    case 'B': base = "byte"; ++i; break;
    case 'C': base = "char"; ++i; break;
    case 'D': base = "double"; ++i; break;
    case 'F': base = "float"; ++i; break;
    case 'I': base = "int"; ++i; break;
    case 'J': base = "long"; ++i; break;
    case 'S': base = "short"; ++i; break;
    case 'Z': base = "boolean"; ++i; break;
    case 'V': base = "void"; ++i; break;
    case 'L': {
        size_t semi = d.find(';', i);
        if (semi == std::string::npos)
            fail(ErrorKind::MalformedPool, "unterminated class descriptor: " + d);
        base = dotted(d.substr(i + 1, semi - i - 1));
        i = semi + 1;
        break;
    }
    default:
        fail(ErrorKind::MalformedPool, "invalid descriptor character in " + d);
    }
    for (int k = 0; k < dims; ++k)
        base += "[]";
    return base;
}

} // namespace

std::vector<std::string> parse_method_descriptor_params(const std::string& descriptor)
{
    if (descriptor.empty() || descriptor[0] != '(')
        fail(ErrorKind::MalformedPool, "method descriptor must start with '(': " + descriptor);
    std::vector<std::string> params;
    size_t i = 1;
    while (i < descriptor.size() && descriptor[i] != ')')
        params.push_back(parse_type_at(descriptor, i));
    if (i >= descriptor.size())
        fail(ErrorKind::MalformedPool, "method descriptor missing ')': " + descriptor);
    return params;
}

std::string parse_method_descriptor_return(const std::string& descriptor)
{
    size_t close = descriptor.find(')');
    if (close == std::string::npos)
        fail(ErrorKind::MalformedPool, "method descriptor missing ')': " + descriptor);
    size_t i = close + 1;
    return parse_type_at(descriptor, i);
}

std::string parse_field_descriptor(const std::string& descriptor)
{
    size_t i = 0;
    std::string t = parse_type_at(descriptor, i);
    if (i != descriptor.size() || t == "void")
        fail(ErrorKind::MalformedPool, "invalid field descriptor: " + descriptor);
    return t;
}

} // namespace patchprobe::cf
