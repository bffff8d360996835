// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace patchprobe {

enum class ErrorKind {
    BadMagic,
    Truncated,
    UnsupportedVersion,
    MalformedPool,
    UnknownOpcode,
    BranchOutOfRange,
    NotAnArchive,
    StrippedDebugInfo,
    SyntaxError,
    MalformedHunk,
    NoSemanticChange,
    TargetClassMissing,
    PatchApplyFailure,
    CacheCorrupt,
    EmptyManifest,
    BadInput,
    Io,
    Internal,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message)
{
    throw Error(kind, message);
}

} // namespace patchprobe
