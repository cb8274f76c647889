#pragma once

#include <stdexcept>
#include <string>

namespace gmedia {

/// Shapes or grid specs that do not line up.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A scalar argument outside its allowed domain.
class ArgumentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Malformed text input. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    int line() const { return line_; }

private:
    int line_;
};

/// Action parameters that break one or more invariants.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Datasets that cannot support the requested operation.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// CEM could not draw enough valid samples.
class SamplingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inconsistent or incomplete run configuration.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Binary file I/O failures (bad magic, truncation, unwritable path).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gmedia
