#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace omit {

/// Input outside the domain of a physical formula (zero mass, negative rate, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure failed to converge or produced an inconsistent result.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or unparseable run configuration. `field` is the dotted key path
/// ("drive.P_pu") when the error can be attributed to one entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace omit
