#pragma once

#include <stdexcept>
#include <string>

namespace airy {

// Base class for every domain error the engine reports.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// --- series ---
struct ZeroLeadingCoefficient : Error {
    using Error::Error;
};
struct LogarithmicTerm : Error {
    using Error::Error;
};
// Reading a coefficient at or beyond the truncation bound.
struct TruncationExceeded : Error {
    using Error::Error;
};
// Inverting an exact series with infinitely many inverse terms needs a bound.
struct TruncationRequired : Error {
    using Error::Error;
};

// --- operator ---
struct BadLeading : Error {
    using Error::Error;
};
struct DegenerateDegree : Error {
    using Error::Error;
};
struct BadDegree : Error {
    using Error::Error;
};
struct InternalSlopeMismatch : Error {
    using Error::Error;
};

// --- branches ---
struct NonSimpleLinearization : Error {
    using Error::Error;
};
struct WrongCase : Error {
    using Error::Error;
};
struct SingularSystem : Error {
    using Error::Error;
};

// --- monodromy ---
struct ValuationMismatch : Error {
    using Error::Error;
};
struct RationalRoundingFailure : Error {
    using Error::Error;
};

// --- reduction ---
struct NonInvertibleGauge : Error {
    using Error::Error;
};
struct NotSemisimple : Error {
    using Error::Error;
};
struct CaseNotImplemented : Error {
    using Error::Error;
};

// --- cli ---
struct ParseError : Error {
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"), pos(position) {}
    std::size_t pos;
};

} // namespace airy
