#pragma once

#include <stdexcept>
#include <string>

namespace hhdr {

// Invalid or inconsistent user input (config files, CLI values). Exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Failed numerics (non-convergent fits, empty baths, ...). Exit code 3.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hhdr
