#pragma once

#include <stdexcept>
#include <string>

namespace crossgp {

// Bad input values, contract violations, malformed data in strict mode. Exit code 1.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Missing or unreadable/unwritable files. Exit code 2.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace crossgp
