#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace rmm {

using index_t = int;
using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid mesh connectivity (non-manifold edges, duplicate cells, bad orientation).
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Invalid generator or model parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Degenerate or inverted cell geometry.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Violated call contract, e.g. an order-1 element asked for inner functionals.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent or unknown boundary constraints.
class ConstraintError : public Error {
 public:
  using Error::Error;
};

/// Linear solver failure (indefinite matrix, no convergence).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// Malformed run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

enum class CellKind { tri, quad };

inline const char* to_string(CellKind k) { return k == CellKind::tri ? "tri" : "quad"; }

}  // namespace rmm
