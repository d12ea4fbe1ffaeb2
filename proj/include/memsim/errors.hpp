#pragma once

#include <stdexcept>
#include <string>

namespace memsim {

// Numerical failure distinct from input validation (CLI exit code 3 vs 2).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace memsim
