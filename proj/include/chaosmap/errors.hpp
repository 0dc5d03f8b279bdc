#pragma once

#include <stdexcept>
#include <string>

namespace chaosmap {

/// Raised when a caller breaks an operation's preconditions (bad lengths,
/// nonpositive constants, malformed boxes, unknown names).
class ContractError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a model evaluation produces NaN/Inf.
class NumericalBlowup : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Lookup of an unknown system, parameter, or job.
class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A long-running computation observed a stop request.
class Cancelled : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what)
{
    if (!cond)
        throw ContractError(what);
}

}  // namespace chaosmap
