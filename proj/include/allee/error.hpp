#pragma once

#include <stdexcept>

namespace allee {

// Argument outside the domain on which a quantity is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// A map or expression produced a non-finite or negative value.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A documented precondition of an operation does not hold.
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class RootNotFound : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed textual input: map definitions, noise tables, CLI grids.
class ParseError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace allee
