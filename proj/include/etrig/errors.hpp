#ifndef ETRIG_ERRORS_HPP
#define ETRIG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace etrig {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed external input (corpus lines, transition files, ...).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

// Structurally well-formed input that violates a domain rule
// (BIO validity, span overlap, misaligned sentence counts, ...).
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Inconsistent or out-of-range configuration values.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Bad model/embedding archive contents.
class FormatError : public Error {
 public:
  explicit FormatError(const std::string& msg) : Error(msg) {}
};

// Filesystem-level failures.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace etrig

#endif  // ETRIG_ERRORS_HPP
