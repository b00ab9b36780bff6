#ifndef MFMRASCH_ERROR_HPP
#define MFMRASCH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mfmrasch {

// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration, arguments or call preconditions (CLI exit code 1).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// Non-finite state reached during computation (CLI exit code 3).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mfmrasch

#endif  // MFMRASCH_ERROR_HPP
