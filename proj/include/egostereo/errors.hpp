#pragma once

#include <stdexcept>
#include <string>

namespace egostereo {

// Base class for everything thrown by this library, so callers can
// distinguish our failures from std:: ones at the CLI boundary.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad configuration / bad arguments (CLI exit code 2).
struct ConfigError : Error {
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Dataset problems: missing files, malformed manifests, decode failures
// (CLI exit code 3).
struct DataError : Error {
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Numerical blow-up during training (CLI exit code 4).
struct DivergenceError : Error {
  explicit DivergenceError(const std::string& msg) : Error(msg) {}
};

// A pixel/ray fell outside the usable field of view.
struct OutOfViewError : Error {
  explicit OutOfViewError(const std::string& msg) : Error(msg) {}
};

// Geometric input does not determine a result (coincident points, ...).
struct DegenerateInputError : Error {
  explicit DegenerateInputError(const std::string& msg) : Error(msg) {}
};

// Tensor/shape mismatch inside the nn stack. Always a programming error.
struct ShapeError : Error {
  explicit ShapeError(const std::string& msg) : Error(msg) {}
};

}  // namespace egostereo
