#pragma once

#include <stdexcept>
#include <string>

namespace vst {

// CLI exit-code contract: 0 success, 2 config error, 3 numeric failure,
// 4 I/O error.
enum ExitCode : int {
    exit_ok = 0,
    exit_config = 2,
    exit_numeric = 3,
    exit_io = 4,
};

// Bad configuration, malformed input files, mismatched artifacts.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Singularities, non-finite intermediates, diverged iterations.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem failures.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace vst
