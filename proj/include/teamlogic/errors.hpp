#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace teamlogic {

// Root of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unknown variable, element, symbol, or an empty domain.
class DomainError : public Error {
public:
    using Error::Error;
};

// A formula of the wrong kind was supplied (dependency atom where a
// first-order formula is required, negation over a dependency atom, ...).
class TypeError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t position)
        : Error("at position " + std::to_string(position) + ": " + message), position_(position) {}
    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// A sentence does not have the shape of a syntactic class (DED, U-sentence).
class ValidationError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// Raised when a search exceeds its configured node budget. Never converted
// into a boolean answer.
class BudgetExceeded : public Error {
public:
    using Error::Error;
};

}  // namespace teamlogic
