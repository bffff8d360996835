// SPDX-License-Identifier: Apache-2.0
#include "patchprobe/error.hpp"

namespace patchprobe {

const char* to_string(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::BadMagic: return "BadMagic";
    case ErrorKind::Truncated: return "Truncated";
    case ErrorKind::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorKind::MalformedPool: return "MalformedPool";
    case ErrorKind::UnknownOpcode: return "UnknownOpcode";
    case ErrorKind::BranchOutOfRange: return "BranchOutOfRange";
    case ErrorKind::NotAnArchive: return "NotAnArchive";
    case ErrorKind::StrippedDebugInfo: return "StrippedDebugInfo";
    case ErrorKind::SyntaxError: return "SyntaxError";
    case ErrorKind::MalformedHunk: return "MalformedHunk";
    case ErrorKind::NoSemanticChange: return "NoSemanticChange";
    case ErrorKind::TargetClassMissing: return "TargetClassMissing";
    case ErrorKind::PatchApplyFailure: return "PatchApplyFailure";
    case ErrorKind::CacheCorrupt: return "CacheCorrupt";
    case ErrorKind::EmptyManifest: return "EmptyManifest";
    case ErrorKind::BadInput: return "BadInput";
    case ErrorKind::Io: return "Io";
    case ErrorKind::Internal: return "Internal";
    }
    return "Unknown";
}

} // namespace patchprobe
