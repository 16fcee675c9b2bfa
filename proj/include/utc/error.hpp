#pragma once

#include <stdexcept>
#include <string>

namespace utc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Shape or order mismatch between operands.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Result would not fit in addressable index space, or an enumeration bound was exceeded.
class CapacityError : public Error {
public:
    using Error::Error;
};

class ArgumentError : public Error {
public:
    using Error::Error;
};

// Non-finite or otherwise invalid numeric input.
class InputError : public Error {
public:
    using Error::Error;
};

class DegenerateInputError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, long row, long col)
        : Error(what + " (row " + std::to_string(row) + ", col " + std::to_string(col) + ")"),
          row_(row), col_(col) {}
    long row() const { return row_; }
    long col() const { return col_; }

private:
    long row_;
    long col_;
};

class IoError : public Error {
public:
    using Error::Error;
};

// Linear solve failed to reach tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}
    double residual() const { return residual_; }

private:
    double residual_;
};

class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int iteration)
        : Error(what + " (iteration " + std::to_string(iteration) + ")"), iteration_(iteration) {}
    int iteration() const { return iteration_; }

private:
    int iteration_;
};

}  // namespace utc
