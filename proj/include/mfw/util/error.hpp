#pragma once

#include <stdexcept>
#include <string>

namespace mfw {

// Invalid user configuration. The CLI maps this to exit code 2 and prints
// the offending section/field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string where, std::string what)
        : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
    const std::string& where() const { return where_; }

private:
    std::string where_;
};

// Structural misuse of an operation (wrong grid, wrong norm kind, ...).
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace mfw
