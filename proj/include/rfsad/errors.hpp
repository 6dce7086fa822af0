#pragma once

#include <stdexcept>
#include <string>

namespace rfsad {

/// Base of every domain error raised by the library. The CLI maps these to
/// exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file: bad magic, unsupported version, unparsable JSON.
class FormatError : public Error {
public:
    using Error::Error;
};

/// File shorter than its header declares.
class TruncationError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Non-finite or inconsistent payload values.
class DataError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class EstimationError : public Error {
public:
    using Error::Error;
};

class ModelError : public Error {
public:
    using Error::Error;
};

class ScoringError : public Error {
public:
    using Error::Error;
};

class EvaluationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace rfsad
