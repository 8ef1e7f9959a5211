#pragma once

#include <stdexcept>

namespace rns {

/// Invalid parameters or evaluation outside the defined domain.
class DomainError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: step-size underflow, quadrature non-convergence.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rns
