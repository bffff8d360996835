// SPDX-License-Identifier: Apache-2.0
//
// Turns decoded methods into ordered logical blocks with feature sets:
// line-based block splitting, CFG construction with backward-branch loop
// detection, and operand-stack abstract interpretation for precise
// invocation argument types.
#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "patchprobe/classfile.hpp"
#include "patchprobe/feature.hpp"
#include "patchprobe/hierarchy.hpp"

namespace patchprobe::bc {

struct LogicalBlock {
    int index = 0; // position within the method
    int line = 0;
    size_t first = 0; // slice [first, first + count) of the instruction stream
    size_t count = 0;
    FeatureSet features;
};

struct Cfg {
    struct Edge {
        enum class Kind { Fallthrough, Branch, Switch, Handler };
        uint32_t source = 0; // instruction offset of the edge source
        uint32_t target = 0; // leader offset of the target block
        Kind kind = Kind::Fallthrough;
    };
    std::vector<uint32_t> leaders; // sorted basic-block leader offsets
    std::vector<Edge> edges;

    size_t block_index(uint32_t offset) const; // block containing the offset
};

// Partitions the stream into maximal runs of instructions sharing a mapped
// source line. A line revisited in disjoint offset runs yields one block per
// run.
std::vector<LogicalBlock> split_blocks(const cf::InstructionStream& stream, const cf::LineMap& lines);

Cfg build_cfg(const cf::MethodBody& body);

// Lines of backward-branch targets: every goto or conditional branch whose
// target offset precedes it marks the target's line as a loop header.
std::set<int> detect_loops(const Cfg& cfg, const cf::InstructionStream& stream, const cf::LineMap& lines);

// Forward abstract interpretation over typed frames. Returns refined
// argument types per invocation offset. On analysis bailout the map is empty
// and `bailed` (when given) is set; callers fall back to declared descriptor
// types.
std::map<uint32_t, std::vector<std::string>> infer_argument_types(const cf::RawClass& cls,
                                                                  const cf::MethodBody& body,
                                                                  const ClassHierarchy& hierarchy,
                                                                  bool* bailed = nullptr);

struct MethodContext {
    const cf::RawClass* cls = nullptr;
    const cf::MethodBody* body = nullptr;
    const ClassHierarchy* hierarchy = nullptr;
    std::set<int> loop_header_lines;
    std::map<uint32_t, std::vector<std::string>> refined_args;
};

FeatureSet extract_block_features(const LogicalBlock& block, const MethodContext& ctx);

struct BlockEntry {
    int line = 0;
    FeatureSet features;
};

// Parsed container with a hierarchy oracle over all contained classes plus
// the built-in platform table. Immutable once constructed.
class BinaryModel {
public:
    BinaryModel(const std::map<std::string, std::vector<uint8_t>>& classes, cf::ParseOptions options = {});

    const ClassHierarchy& hierarchy() const { return hierarchy_; }
    const cf::RawClass* find(const std::string& name) const;
    std::vector<std::string> class_names() const;

    // The class plus its nested classes (Outer$... name prefix), merged and
    // sorted by line; blocks with empty feature sets dropped. Raises
    // StrippedDebugInfo when a method with code lacks a line table.
    std::vector<BlockEntry> class_feature_sequence(const std::string& class_name) const;

private:
    std::map<std::string, cf::RawClass> classes_;
    ClassHierarchy hierarchy_;
};

// Per-method analysis used by BinaryModel and directly by tests.
std::vector<LogicalBlock> analyze_method(const cf::RawClass& cls, const cf::MethodBody& body,
                                         const ClassHierarchy& hierarchy);

} // namespace patchprobe::bc
