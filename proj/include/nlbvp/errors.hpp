#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nlbvp {

// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Expression text could not be parsed; `offset` is the byte position in
// the input where the problem was detected.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& what, std::size_t offset)
        : Error(what + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
    std::size_t offset() const { return offset_; }

private:
    std::size_t offset_;
};

// A variable referenced during evaluation has no binding.
class UnboundVariable : public Error {
public:
    using Error::Error;
};

// Evaluation left the real domain: ln/sqrt of a negative, division by
// exact zero, negative base with fractional exponent, arcsin out of range.
class DomainError : public Error {
public:
    using Error::Error;
};

class NonPositiveScale : public Error {
public:
    using Error::Error;
};

class InvalidRadii : public Error {
public:
    using Error::Error;
};

class InvalidResolution : public Error {
public:
    using Error::Error;
};

class PointOutsideDomain : public Error {
public:
    using Error::Error;
};

// File could not be parsed; carries a 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// A structural invariant of a value (mesh, bindings, config) is violated.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

// A coefficient hit a singularity (or other domain error) at a quadrature
// point; wraps the underlying DomainError with location context.
class CoefficientDomainError : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

// Reconstructed boundary trace is not constant on a component.
class NonConstantTrace : public Error {
public:
    using Error::Error;
};

class AllZeroField : public Error {
public:
    using Error::Error;
};

// No sign change found while scanning for a root bracket.
class BracketingFailure : public Error {
public:
    using Error::Error;
};

// Bisection was handed a bracket without a sign change.
class NoSignChange : public Error {
public:
    using Error::Error;
};

class InvalidLambda : public Error {
public:
    using Error::Error;
};

}  // namespace nlbvp
