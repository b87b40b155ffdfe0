#pragma once

#include <stdexcept>
#include <string>

namespace pacer {

// Malformed inputs, broken invariants, bad file contents. CLI exit code 2.
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// Numeric evaluation left the representable/defined domain (overflow,
// singularity, division by zero cost). CLI exit code 2.
class EvalDomainError : public std::domain_error {
public:
    explicit EvalDomainError(const std::string& what) : std::domain_error(what) {}
};

// A quantity was requested outside the parameter regime where it is defined,
// e.g. a contraction bound at k >= 2. CLI exit code 3.
class RegimeError : public std::domain_error {
public:
    explicit RegimeError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace pacer
