#pragma once

#include <stdexcept>
#include <string>

namespace gse {

/// Base of every error raised by the library. The CLI maps the three
/// subclasses onto distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: violated invariant, bad configuration, malformed schema.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Numerical failure: singular system, non-convergence, divergence.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Filesystem or parse failure on external data.
class IoError : public Error {
public:
    using Error::Error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ConfigError(message);
}

}  // namespace gse
