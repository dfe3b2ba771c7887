#pragma once

#include <stdexcept>
#include <string>

namespace mtk {

/// Bad or inconsistent run configuration. Carries the offending field name.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field + ": " + what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Hard numerical abort (overflow guard, divergence, step underflow).
/// Carries the module that raised it; callers map this to exit code 3.
class NumericError : public std::runtime_error {
public:
    NumericError(std::string module, const std::string& reason)
        : std::runtime_error(module + ": " + reason), module_(std::move(module)) {}
    const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

} // namespace mtk
