#pragma once

#include <stdexcept>
#include <string>

namespace gcalc {

// Base class for everything the engine throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Bad configuration or arguments, or a declared-regularity audit failure.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Work would exceed a configured node or enumeration budget.
class BudgetError : public Error {
public:
    using Error::Error;
};

// Numerical failure: non-finite values, iteration limits, bound blow-up.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace gcalc
