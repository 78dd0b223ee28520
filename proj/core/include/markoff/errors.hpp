#pragma once

#include <stdexcept>
#include <string>

namespace markoff {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A documented precondition was violated by the caller.
struct PreconditionError : Error {
    using Error::Error;
};

/// Input outside the mathematical domain of the function (e.g. log 0).
struct DomainError : Error {
    using Error::Error;
};

/// An evaluation hit one of the singular points {0, +sqrt(mu), -sqrt(mu)}.
struct SingularArgumentError : Error {
    using Error::Error;
};

/// mu = 4 (tau = 2): the reducible case, rejected at construction.
struct ReducibleCaseError : Error {
    using Error::Error;
};

/// A branch sum hypothesis failed; the caller must refine the decomposition.
struct DecompositionError : Error {
    using Error::Error;
};

/// A budgeted search ended without a definite answer.
struct InconclusiveError : Error {
    using Error::Error;
};

} // namespace markoff
