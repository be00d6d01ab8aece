// errors.hpp - Exception hierarchy for domain refusals and bad input.
//
// Each concrete type carries a stable name() that the CLI prints on its
// diagnostic stream and maps to an exit code: ConfigError -> 2, every
// DomainError -> 3.
#pragma once

#include <stdexcept>
#include <string>

namespace htql {

class Error : public std::runtime_error {
public:
    Error(std::string name, const std::string& what)
        : std::runtime_error(name + ": " + what), name_(std::move(name)) {}
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

// Invalid or malformed input (config files, impossible parameter values).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

// A structurally valid request the engine refuses on mathematical grounds.
class DomainError : public Error {
public:
    using Error::Error;
};

class UnstableSystem : public DomainError {
public:
    explicit UnstableSystem(const std::string& what) : DomainError("UnstableSystem", what) {}
};

// Mean-plus-peak load below capacity: heavy-tailed activity alone cannot
// fill the buffer, so the tail engine does not apply.
class LightRegime : public DomainError {
public:
    explicit LightRegime(const std::string& what) : DomainError("LightRegime", what) {}
};

// Some critical set has drift exactly zero (within tolerance).
class CriticalCase : public DomainError {
public:
    explicit CriticalCase(const std::string& what) : DomainError("CriticalCase", what) {}
};

class TooManyFlows : public DomainError {
public:
    explicit TooManyFlows(const std::string& what) : DomainError("TooManyFlows", what) {}
};

// Service-rate ordering precondition violated (e.g. c outside (rho, r)).
class RateOrder : public DomainError {
public:
    explicit RateOrder(const std::string& what) : DomainError("RateOrder", what) {}
};

class BadPartition : public DomainError {
public:
    explicit BadPartition(const std::string& what) : DomainError("BadPartition", what) {}
};

class InfeasibleMix : public DomainError {
public:
    explicit InfeasibleMix(const std::string& what) : DomainError("InfeasibleMix", what) {}
};

class OutOfDomain : public DomainError {
public:
    explicit OutOfDomain(const std::string& what) : DomainError("OutOfDomain", what) {}
};

class UnstableSim : public DomainError {
public:
    explicit UnstableSim(const std::string& what) : DomainError("UnstableSim", what) {}
};

} // namespace htql
