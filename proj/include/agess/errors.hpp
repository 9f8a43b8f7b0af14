#pragma once

#include <stdexcept>
#include <string>

namespace agess {

// Bad user input: malformed configs, missing files, invalid parameters.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A sampler could not continue (stuck shrinkage loop, invalid chain state).
struct SamplingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DiagnosticsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace agess
