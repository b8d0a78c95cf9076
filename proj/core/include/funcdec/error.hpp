#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace funcdec {

// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Lexing / parsing failure. `position` is a byte offset into the source text.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"), position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

// A primitive was applied outside its domain (log of a non-positive value,
// division by an interval containing zero, ...). When the failure happened
// while processing a decomposition, `observable` holds the 0-based index.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what, std::optional<std::size_t> observable = std::nullopt)
        : Error(observable ? what + " (observable w_" + std::to_string(*observable + 1) + ")" : what),
          observable_(observable) {}

    std::optional<std::size_t> observable() const noexcept { return observable_; }

private:
    std::optional<std::size_t> observable_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

// Structural invariant of a value was violated (typically on deserialization).
class InvariantError : public Error {
public:
    using Error::Error;
};

// A search or approximation ran out of budget. For counting searches the
// number of leaves found so far is a valid lower bound.
class BudgetError : public Error {
public:
    explicit BudgetError(const std::string& what, std::size_t lower_bound = 0)
        : Error(what), lower_bound_(lower_bound) {}

    std::size_t lower_bound() const noexcept { return lower_bound_; }

private:
    std::size_t lower_bound_;
};

// The linear solver failed to reach a verdict (iteration limit, breakdown).
// Distinct from a proof of infeasibility.
class SolverError : public Error {
public:
    using Error::Error;
};

} // namespace funcdec
