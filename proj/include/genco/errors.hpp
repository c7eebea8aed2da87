#ifndef GENCO_ERRORS_HPP
#define GENCO_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace genco {

// Shape of an argument does not match the declared dimensions.
struct DimensionError : std::runtime_error {
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

// An API precondition was violated (non-scalar loss, missing grads, ...).
struct ContractError : std::runtime_error {
    explicit ContractError(const std::string& msg) : std::runtime_error(msg) {}
};

// Input values outside the operation's domain (NaN scores, p not in [0,1]).
struct DomainError : std::runtime_error {
    explicit DomainError(const std::string& msg) : std::runtime_error(msg) {}
};

// The constraint system admits no solution.
struct InfeasibleError : std::runtime_error {
    explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

// Exact search exceeded its node-expansion budget. Never downgraded to a
// best-effort result; callers decide how to recover.
struct SolverBudgetError : std::runtime_error {
    explicit SolverBudgetError(const std::string& msg) : std::runtime_error(msg) {}
};

// Instance too large for an enumeration-based routine.
struct BoundError : std::runtime_error {
    explicit BoundError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad metric/evaluation parameters (k >= n_real, empty sample set, ...).
struct ParameterError : std::runtime_error {
    explicit ParameterError(const std::string& msg) : std::runtime_error(msg) {}
};

// File parse/format/IO failures.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace genco

#endif // GENCO_ERRORS_HPP
