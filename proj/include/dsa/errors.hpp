#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dsa {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ModulusMismatch : public Error {
public:
    using Error::Error;
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class InvalidModulus : public Error {
public:
    using Error::Error;
};

/// Configuration outside K >= 3, T <= K-3 without the demonstration override.
class Infeasible : public Error {
public:
    using Error::Error;
};

class MissingMessage : public Error {
public:
    using Error::Error;
};

/// A well-formed run decoded the wrong sum. Always an implementation bug.
class DecodeFailure : public Error {
public:
    using Error::Error;
};

class InvalidCollusion : public Error {
public:
    using Error::Error;
};

/// The seed space is larger than the enumeration budget. Carries the size so
/// callers can shrink (K, L, q).
class BudgetExceeded : public Error {
public:
    BudgetExceeded(const std::string& what, double log2_required, std::uint64_t budget)
        : Error(what), log2_required_(log2_required), budget_(budget) {}

    double log2_required() const noexcept { return log2_required_; }
    std::uint64_t budget() const noexcept { return budget_; }

private:
    double log2_required_;
    std::uint64_t budget_;
};

} // namespace dsa
