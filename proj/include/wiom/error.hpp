#pragma once

#include <stdexcept>
#include <string>

namespace wiom {

// Invalid configuration, schema violation, or bad user input. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tensor or matrix dimensions that do not chain.
struct ShapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Container format violations: bad magic, version, truncation, checksum mismatch.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace wiom
