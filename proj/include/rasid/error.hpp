#pragma once

#include <stdexcept>
#include <string>

namespace rasid {

/// Bad or missing configuration: unreadable config file, out-of-range
/// parameter, referenced path that does not exist.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data violates its contract: malformed record, non-monotone
/// timestamps, a stream with no profile, and so on.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rasid
