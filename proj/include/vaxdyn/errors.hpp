#pragma once

#include <stdexcept>
#include <string>

namespace vaxdyn {

/// Argument outside the mathematical domain of an operation (e.g. n not in [0,1]).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Parameter combination for which a formula is undefined (zero denominators).
class DegenerateParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// ModelParams invariant violated.
class InvalidParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class IntegrationDivergedError : public std::runtime_error {
public:
    IntegrationDivergedError(double t, const std::string& what)
        : std::runtime_error(what), time_(t)
    {
    }
    double time() const noexcept { return time_; }

private:
    double time_;
};

/// More than one candidate fixed point lies within the classification tolerance.
class AmbiguousEndpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// R0 (or the case discriminant) sits exactly on a regime boundary.
class BoundaryRegimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoSaddleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateSaddleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ComparisonError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class BasinConfigurationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid scenario configuration; `key()` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key))
    {
    }
    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace vaxdyn
