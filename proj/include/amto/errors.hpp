#pragma once

#include <stdexcept>
#include <string>

namespace amto {

/// Invalid configuration or spec file. The CLI maps this to exit code 2.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Malformed or inconsistent input data. Mapped to exit code 1.
struct data_error : std::runtime_error {
    explicit data_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite loss, gradient, or parameter during training. Mapped to exit 1.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace amto
