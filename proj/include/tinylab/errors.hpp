#pragma once

#include <stdexcept>
#include <string>

namespace tinylab {

/// Base class for every error the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Incompatible tensor shapes (matmul inner dims, bias width, reshape size).
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Token id outside [0, V) or character missing from a vocabulary.
class VocabError : public Error {
public:
    using Error::Error;
};

/// Argument outside its valid domain (dropout p, temperature, config values).
class ValueError : public Error {
public:
    using Error::Error;
};

/// Non-finite loss or tape misuse during training.
class NumericError : public Error {
public:
    using Error::Error;
};

/// File format, parse, and filesystem problems.
class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace tinylab
