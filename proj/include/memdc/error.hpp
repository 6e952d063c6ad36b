#pragma once

#include <stdexcept>
#include <string>

namespace memdc {

/// Rejected argument or model parameter (pulse too large, zero read voltage, ...).
class ModelError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Output or power requested while the switch matrix has the loop open.
class LoopOpenError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// A resistance target that cannot be reached with the device bounds.
class UnreachableTarget : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid experiment configuration; `field` names the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace memdc
