#pragma once

#include <stdexcept>
#include <string>

namespace regshb {

// Bad parameter values, constraint violations, unknown config keys.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad runtime data (non-finite vectors, shape mismatches, empty samples).
struct InputError : std::runtime_error {
    explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace regshb
