// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace patchprobe::cf {

struct ContainerResult {
    // Fully-qualified dotted class name -> raw class-file bytes.
    std::map<std::string, std::vector<uint8_t>> classes;
    // DuplicateClassName and similar non-fatal findings.
    std::vector<std::string> warnings;
};

// Reads a .class file, a directory tree, or a zip-format archive (.jar).
// Class names derive from entry paths; duplicate names keep the first entry
// and add a warning. Nested archives are not recursed.
ContainerResult read_container(const std::string& path);

} // namespace patchprobe::cf
