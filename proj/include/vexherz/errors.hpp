#pragma once

#include <stdexcept>
#include <string>

namespace vexherz {

/// Raised when an input violates a mathematical hypothesis (exponent outside
/// the admissible class, beta out of range, support spanning several annuli).
/// The message names the violated hypothesis.
class PreconditionError : public std::invalid_argument
{
public:
  explicit PreconditionError(const std::string& what)
    : std::invalid_argument(what)
  {}
};

/// Raised for malformed descriptors and configuration documents.
class ConfigError : public std::runtime_error
{
public:
  explicit ConfigError(const std::string& what)
    : std::runtime_error(what)
  {}
};

} // namespace vexherz
