#pragma once

#include <stdexcept>
#include <string>

namespace flatchain {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Vector or covector length does not match the ambient dimension.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Operands come from different coefficient groups (kind or modulus).
class GroupMismatchError : public Error {
public:
    using Error::Error;
};

/// Input geometry is degenerate (dependent bases, zero-volume simplices, ...).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Invalid argument that is not covered by a more specific error.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Malformed chain/config file; the message names the offending location.
class FormatError : public Error {
public:
    using Error::Error;
};

/// A slicing level hits a full facet of some summand.
class ExceptionalLevelError : public Error {
public:
    using Error::Error;
};

/// A linear or integer program could not be solved within its limits.
class SolverError : public Error {
public:
    using Error::Error;
};

} // namespace flatchain
