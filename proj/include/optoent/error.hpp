#pragma once

#include <stdexcept>
#include <string>

namespace optoent {

// Precondition or argument violated by the caller.
class ContractViolation : public std::invalid_argument {
public:
    explicit ContractViolation(const std::string& what) : std::invalid_argument(what) {}
};

// Drift matrix has an eigenvalue with non-negative real part.
class UnstableSystem : public ContractViolation {
public:
    explicit UnstableSystem(const std::string& what) : ContractViolation(what) {}
};

// Quadrature, bracketing or optimizer failed to reach its tolerance.
class NonConvergence : public std::runtime_error {
public:
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace optoent
