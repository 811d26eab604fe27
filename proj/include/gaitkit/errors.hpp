#pragma once

#include <stdexcept>
#include <string>

namespace gaitkit {

// Error classes map one-to-one onto CLI exit codes (0 = success).
enum class ErrorClass {
    validation = 2,       // bad input, bad parameter, bad file format
    insufficient_data = 3,
    non_convergence = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorClass cls, const std::string& msg) : std::runtime_error(msg), cls_(cls) {}
    ErrorClass error_class() const noexcept { return cls_; }

private:
    ErrorClass cls_;
};

// Malformed external text input; message carries the line number.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

// Data violates a documented invariant (non-monotone timestamps, shape mismatch, ...).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

class ParameterError : public Error {
public:
    explicit ParameterError(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

// Unknown magic/version or structural problems in a persisted container.
class FormatError : public Error {
public:
    explicit FormatError(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

// API misuse, e.g. stepping a decided sequential test.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

class InsufficientDataError : public Error {
public:
    explicit InsufficientDataError(const std::string& msg) : Error(ErrorClass::insufficient_data, msg) {}
};

// No usable walking activity found in the signal.
class NoGaitError : public InsufficientDataError {
public:
    explicit NoGaitError(const std::string& msg) : InsufficientDataError(msg) {}
};

class NoCyclesError : public InsufficientDataError {
public:
    explicit NoCyclesError(const std::string& msg) : InsufficientDataError(msg) {}
};

// Numerically degenerate data: constant vectors, zero gravity, isotropic PCA input.
class DegenerateError : public Error {
public:
    explicit DegenerateError(const std::string& msg) : Error(ErrorClass::insufficient_data, msg) {}
};

class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& msg) : Error(ErrorClass::non_convergence, msg) {}
};

} // namespace gaitkit
