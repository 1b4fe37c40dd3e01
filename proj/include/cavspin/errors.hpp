#pragma once

#include <stdexcept>
#include <string>

namespace cavspin {

/// A parameter lies outside the documented domain of an operation.
class InvalidParameter : public std::invalid_argument {
public:
    explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Inputs are individually valid but violate an ordering the formula needs
/// (e.g. tau_on < tau_off < tau_dark).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

class NoSteadyState : public std::runtime_error {
public:
    explicit NoSteadyState(const std::string& what) : std::runtime_error(what) {}
};

/// JᵀJ is singular at the solution; `parameter()` names the direction that
/// the data does not constrain.
class RankDeficient : public std::runtime_error {
public:
    RankDeficient(const std::string& what, std::string parameter)
        : std::runtime_error(what), parameter_(std::move(parameter)) {}
    [[nodiscard]] const std::string& parameter() const noexcept { return parameter_; }

private:
    std::string parameter_;
};

class NoSignal : public std::runtime_error {
public:
    explicit NoSignal(const std::string& what) : std::runtime_error(what) {}
};

class IngestionError : public std::runtime_error {
public:
    explicit IngestionError(const std::string& what) : std::runtime_error(what) {}
};

class InsufficientData : public std::runtime_error {
public:
    explicit InsufficientData(const std::string& what) : std::runtime_error(what) {}
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace cavspin
