// SPDX-License-Identifier: Apache-2.0
//
// Decoder for the JVM class-file format: constant pool, members, bytecode,
// exception tables and line-number tables. Parsed structures are immutable
// after construction and safe to share across threads.
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "patchprobe/error.hpp"

namespace patchprobe::cf {

// Highest class-file major version accepted by default (configurable).
inline constexpr uint16_t kDefaultMaxMajorVersion = 70;

inline constexpr uint16_t kAccStatic = 0x0008;
inline constexpr uint16_t kAccFinal = 0x0010;
inline constexpr uint16_t kAccInterface = 0x0200;
inline constexpr uint16_t kAccAbstract = 0x0400;
inline constexpr uint16_t kAccNative = 0x0100;

enum class CpTag : uint8_t {
    Utf8 = 1,
    Integer = 3,
    Float = 4,
    Long = 5,
    Double = 6,
    Class = 7,
    String = 8,
    Fieldref = 9,
    Methodref = 10,
    InterfaceMethodref = 11,
    NameAndType = 12,
    MethodHandle = 15,
    MethodType = 16,
    Dynamic = 17,
    InvokeDynamic = 18,
    Module = 19,
    Package = 20,
};

struct ConstantEntry {
    CpTag tag = CpTag::Utf8;
    uint16_t ref1 = 0;        // class index / name index / bootstrap index / reference kind
    uint16_t ref2 = 0;        // name-and-type index / descriptor index
    int32_t int_value = 0;
    int64_t long_value = 0;
    float float_value = 0.0f;
    double double_value = 0.0;
    std::string utf8;         // modified UTF-8 bytes, kept verbatim
};

// Symbolic field/method reference with the owner in dotted binary form.
struct MemberRef {
    std::string owner;
    std::string name;
    std::string descriptor;
};

struct NameAndType {
    std::string name;
    std::string descriptor;
};

class ConstantPool {
public:
    void resize(size_t count) { entries_.resize(count); }
    void set(uint16_t index, ConstantEntry entry) { entries_[index] = std::move(entry); }

    size_t count() const { return entries_.size(); }
    bool present(uint16_t index) const
    {
        return index > 0 && index < entries_.size() && entries_[index].has_value();
    }

    const ConstantEntry& at(uint16_t index, CpTag expected) const;
    const ConstantEntry& at(uint16_t index) const;

    const std::string& utf8(uint16_t index) const;
    // Class entry name converted from internal (slash) to dotted binary form.
    std::string class_name(uint16_t index) const;
    NameAndType name_and_type(uint16_t index) const;
    MemberRef member(uint16_t index) const; // Fieldref / Methodref / InterfaceMethodref

private:
    std::vector<std::optional<ConstantEntry>> entries_;
};

// One decoded bytecode instruction. Branch targets are absolute code offsets.
struct Instruction {
    uint32_t offset = 0;
    uint8_t opcode = 0;
    uint32_t length = 0;
    bool wide = false;

    int32_t imm = 0;                // bipush/sipush/iinc delta/newarray atype/invokeinterface count
    uint16_t local = 0;             // local-variable index for load/store/iinc/ret
    uint16_t cp_index = 0;          // constant-pool operand, when present
    int32_t branch_target = -1;     // absolute offset for branch instructions
    int32_t switch_default = -1;
    std::vector<std::pair<int32_t, int32_t>> switch_pairs; // case value -> absolute offset
    uint8_t dims = 0;               // multianewarray dimension count
};

using InstructionStream = std::vector<Instruction>;

struct ExceptionEntry {
    uint16_t start_pc = 0;
    uint16_t end_pc = 0;
    uint16_t handler_pc = 0;
    std::string catch_type; // empty for catch-all
};

struct LineEntry {
    uint16_t start_pc = 0;
    uint16_t line = 0;
};

struct MethodBody {
    std::string owner;
    std::string name;
    std::string descriptor;
    uint16_t access_flags = 0;
    bool has_code = false;
    uint16_t max_stack = 0;
    uint16_t max_locals = 0;
    std::vector<uint8_t> code;
    InstructionStream instructions;
    std::vector<ExceptionEntry> exception_table;
    std::vector<LineEntry> line_table;
    bool line_table_present = false;
};

struct FieldInfo {
    uint16_t access_flags = 0;
    std::string name;
    std::string descriptor;
};

struct BootstrapArgument {
    enum class Kind { Int, Long, Float, Double, String, Class, MethodHandle, MethodType, Dynamic };
    Kind kind = Kind::Int;
    int64_t int_value = 0;
    double fp_value = 0.0;
    std::string text; // string payload / class name / descriptor
    MemberRef handle; // for MethodHandle
};

struct BootstrapMethod {
    uint8_t handle_kind = 0;
    MemberRef handle;
    std::vector<BootstrapArgument> arguments;
};

struct RawClass {
    uint32_t magic = 0;
    uint16_t minor_version = 0;
    uint16_t major_version = 0;
    ConstantPool constant_pool;
    uint16_t access_flags = 0;
    std::string this_class;  // dotted binary name, e.g. "a.B$1"
    std::string super_class; // empty for java.lang.Object itself
    std::vector<std::string> interfaces;
    std::vector<FieldInfo> fields;
    std::vector<MethodBody> methods;
    std::vector<BootstrapMethod> bootstrap_methods;

    bool is_interface() const { return (access_flags & kAccInterface) != 0; }
    const MethodBody* find_method(const std::string& name, const std::string& descriptor) const;
};

struct ParseOptions {
    uint16_t max_major_version = kDefaultMaxMajorVersion;
};

// Decodes a complete class file. All constant-pool cross-references are
// validated; errors: BadMagic, Truncated, UnsupportedVersion, MalformedPool,
// UnknownOpcode, BranchOutOfRange.
RawClass parse_class(const std::vector<uint8_t>& bytes, const ParseOptions& options = {});

// Decodes a raw code array into an offset-ordered instruction stream.
InstructionStream decode_instructions(const std::vector<uint8_t>& code);

// Floor line lookup: maps an instruction offset to the line of the latest
// table entry at or before it. Raises StrippedDebugInfo when the method has
// code but no LineNumberTable.
class LineMap {
public:
    explicit LineMap(const MethodBody& body);
    int line_at(uint32_t offset) const;

private:
    std::vector<LineEntry> table_;
};

// Validates modified UTF-8 and converts it to standard UTF-8.
std::string decode_modified_utf8(const std::string& bytes);
// Inverse of decode_modified_utf8; round-trips byte-identically over valid input.
std::string encode_modified_utf8(const std::string& utf8);

// Descriptor helpers. Type names use dotted form with [] suffixes for arrays,
// e.g. "int", "java.lang.String[]".
std::vector<std::string> parse_method_descriptor_params(const std::string& descriptor);
std::string parse_method_descriptor_return(const std::string& descriptor);
std::string parse_field_descriptor(const std::string& descriptor);

const char* opcode_name(uint8_t opcode);

} // namespace patchprobe::cf
