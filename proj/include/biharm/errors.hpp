#pragma once

#include <stdexcept>
#include <string>

namespace biharm {

// Precondition or parameter outside the admissible set.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Quadrature hit a non-finite sample or failed to converge.
class IntegrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Banded factorization failed or the system is numerically singular.
class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, double rcond)
        : std::runtime_error(what), rcond_(rcond) {}
    double rcond() const { return rcond_; }

private:
    double rcond_;
};

// Malformed configuration; `what()` names the offending key path.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace biharm
