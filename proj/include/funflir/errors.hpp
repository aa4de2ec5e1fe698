#pragma once

#include <stdexcept>
#include <string>

namespace funflir {

/// Base class for every failure raised by the library. The CLI maps these to
/// exit code 1 (test-domain error).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Curves or operators defined on different grids were combined.
class GridMismatch : public Error {
public:
    explicit GridMismatch(const std::string& where)
        : Error(where + ": grid mismatch") {}
};

/// Series lengths (or list sizes) disagree.
class LengthMismatch : public Error {
public:
    using Error::Error;
};

/// Invalid argument or violated precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Covariate Gram matrix is singular or too ill-conditioned to invert.
class SingularCovariates : public Error {
public:
    using Error::Error;
};

/// Every eigenvalue is (numerically) zero, so no critical value exists.
class DegenerateSpectrum : public Error {
public:
    using Error::Error;
};

/// Malformed input file; message carries the offending row.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace funflir
