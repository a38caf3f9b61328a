#pragma once

#include <stdexcept>
#include <string>

namespace tcspc {

// File-level failure (open/read/write); distinct from std::invalid_argument
// so the CLI can map validation and I/O problems to different exit codes.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace tcspc
