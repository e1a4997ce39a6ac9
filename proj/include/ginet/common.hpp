#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ginet {

using Matrix = Eigen::MatrixXd;
using IntMatrix = Eigen::MatrixXi;
using BoolMatrix = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

// Error hierarchy. The CLI maps these onto process exit codes:
//   ConfigError/ParameterError/ShapeError/ContractError -> 2 (bad configuration)
//   IoError/ParseError                                  -> 3 (missing or malformed files)
//   NumericError/StateError                             -> 4 (numeric failure)
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A caller passed an out-of-range or inconsistent argument value.
struct ParameterError : Error {
  using Error::Error;
};

// Matrix/vector dimensions do not line up.
struct ShapeError : Error {
  using Error::Error;
};

// A file could not be read or written.
struct IoError : Error {
  using Error::Error;
};

// A file was read but its contents are malformed.
struct ParseError : Error {
  using Error::Error;
};

// A state matrix violates the invariants of its dynamics (one-hot rows,
// values inside [0,1], ...).
struct StateError : Error {
  using Error::Error;
};

// An internal API contract was broken (backward before forward, missing
// gradient at an optimizer step, ...). Indicates a usage bug, not bad data.
struct ContractError : Error {
  using Error::Error;
};

// A configuration file is missing required keys or combines incompatible ones.
struct ConfigError : Error {
  using Error::Error;
};

// A computation produced NaN/Inf or otherwise left the representable range.
struct NumericError : Error {
  using Error::Error;
};

inline std::string shape_str(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

inline void check_shape(bool ok, const std::string& what) {
  if (!ok) throw ShapeError(what);
}

}  // namespace ginet
