#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace afem {

/// Invalid user configuration (bad parameter, mesh too coarse for the mode).
class ConfigurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Factorization met a non-positive pivot.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::ptrdiff_t pivot) : std::runtime_error(what), pivot_(pivot) {}
  std::ptrdiff_t pivot() const { return pivot_; }

 private:
  std::ptrdiff_t pivot_;
};

}  // namespace afem
