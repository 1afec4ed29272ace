#pragma once

#include <stdexcept>
#include <string>

namespace duskseg {

/// Bad input data or parameters: maps to CLI exit code 2.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem / codec / external-process failures: maps to CLI exit code 1.
class io_error : public std::runtime_error {
public:
    explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace duskseg
