#ifndef ADRMTL_ERRORS_HPP
#define ADRMTL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace adrmtl {

// Error categories map to distinct process exit codes in the CLI.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration or usage: missing paths, out-of-range knobs.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Malformed input data: bad annotations, bad file contents.
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Unreadable or unwritable files.
class IoError : public Error {
 public:
  explicit IoError(const std::string& msg) : Error(msg) {}
};

// Non-finite values encountered during computation.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace adrmtl

#endif  // ADRMTL_ERRORS_HPP
