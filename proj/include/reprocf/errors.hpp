#pragma once

#include <stdexcept>
#include <string>

namespace reprocf {

/// Domain or argument violation. The CLI maps these to exit code 1.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed file content; the message carries a row/column location when known.
class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

/// Filesystem failure. The CLI maps these to exit code 2.
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace reprocf
