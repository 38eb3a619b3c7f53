#pragma once

#include <stdexcept>
#include <string>

namespace ivinv {

/// Invalid user input or configuration (bad columns, malformed flags, guards).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical stage could not produce a certified answer.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ivinv
