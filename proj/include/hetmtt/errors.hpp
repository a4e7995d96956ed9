#pragma once

#include <stdexcept>
#include <string>

namespace hetmtt {

/// Invalid scenario or model parameters. The CLI maps this to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Failure while a scenario is running (e.g. consensus on a disconnected graph).
class RuntimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hetmtt
