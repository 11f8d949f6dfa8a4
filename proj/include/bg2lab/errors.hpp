#ifndef BG2LAB_ERRORS_HPP
#define BG2LAB_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace bg2lab {

// Bad parameters, malformed configs, unsupported (model, density) pairs.
// The CLI maps this to exit code 2.
struct ValidationError : std::invalid_argument {
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// A numerical routine failed to reach its accuracy target (integrator drift,
// quadrature non-convergence).  The CLI maps this to exit code 3.
struct AccuracyError : std::runtime_error {
  explicit AccuracyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bg2lab

#endif
