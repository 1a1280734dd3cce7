#pragma once

#include <stdexcept>
#include <string>

namespace qoe {

// Input outside the mathematical domain of an operation (e.g. rate <= 1).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

// No parameter of the requested policy family meets the (D, eps) target.
// Callers that render costs show this as an infinite cost.
class InfeasibleTarget : public std::runtime_error {
public:
    explicit InfeasibleTarget(const std::string& what) : std::runtime_error(what) {}
};

// A formula produced a value it has no meaning for (non-positive log
// argument, state leaving its admissible range during integration).
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace qoe
