#pragma once

#include <stdexcept>
#include <string>

namespace fedpriv {

// Invalid user-supplied configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure during a simulation or search that was configured correctly
// (CLI exit code 3).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fedpriv
