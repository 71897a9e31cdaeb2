#pragma once

#include <stdexcept>
#include <string>

namespace xbarnn {

// Bad user input: unknown preset, malformed config file, missing dataset,
// invalid dimension. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure: diverged training, singular or badly conditioned
// system, residual out of tolerance. The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace xbarnn
