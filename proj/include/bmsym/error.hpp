#pragma once
// Error taxonomy shared by all modules. Everything fails loudly; silent numeric
// fallbacks are not used anywhere.

#include <stdexcept>
#include <string>

namespace bmsym {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed source text; `pos` is a 0-based byte offset into the input.
struct ParseError : Error {
    size_t pos;
    ParseError(size_t p, const std::string& msg)
        : Error(msg + " (at offset " + std::to_string(p) + ")"), pos(p) {}
};

// Numeric evaluation hit a pole/log at its singular point, or an out-of-domain
// special-function argument.
struct SingularEvalError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};

// Exact arithmetic encountered an all-zero denominator.
struct DivisionByZero : Error {
    DivisionByZero() : Error("division by an exactly zero expression") {}
};

// Laurent/Taylor machinery left the representable class (log^2 terms,
// essential singularities, non-expandable atoms at t = 0).
struct SeriesError : Error {
    using Error::Error;
};

struct NotBmFunction : Error {
    using Error::Error;
};

// A dt-slot coefficient carries a pole deeper than the chart's order m.
struct OrderMismatch : Error {
    using Error::Error;
};

struct NotClosed : Error {
    using Error::Error;
};

struct SingularMatrix : Error {
    using Error::Error;
};

struct NonConstantWeight : Error {
    using Error::Error;
};

struct AntiderivativeNotInTable : Error {
    using Error::Error;
};

struct ModelViolation : Error {
    using Error::Error;
};

struct LevelNotRegular : Error {
    using Error::Error;
};

struct AxiomViolation : Error {
    using Error::Error;
};

struct UnsupportedGroup : Error {
    using Error::Error;
};

struct InputError : Error {
    using Error::Error;
};

}  // namespace bmsym
