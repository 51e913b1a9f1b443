#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace hypershell {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

// Error taxonomy. Everything derives from Error so callers can catch the
// library as a whole; CLI maps specific types to exit codes.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad user input: malformed curves, frames, configs, mismatched pairings.
struct ValidationError : Error {
  using Error::Error;
};

// Point outside a chart's parameter domain (or too close to its edge for a
// finite-difference stencil).
struct DomainError : Error {
  using Error::Error;
};

// Gauss curvature is not negative where the operation requires it.
struct NotHyperbolicError : Error {
  using Error::Error;
};

// A direction that must be noncharacteristic is (numerically) characteristic.
struct CharacteristicDirectionError : Error {
  using Error::Error;
};

// A sign classification hit an exact zero where a strict sign is required.
struct DegenerateConfigError : Error {
  using Error::Error;
};

// Picard iteration did not contract. Carries the residual history so callers
// can decide whether to subdivide.
struct ContractionFailure : Error {
  std::vector<double> residual_history;
  ContractionFailure(const std::string& msg, std::vector<double> hist)
      : Error(msg), residual_history(std::move(hist)) {}
};

// Coordinate net folds (Jacobian sign flip) or leaves the surface domain
// before the requested extent is reached.
struct FoldError : Error {
  using Error::Error;
};

// Propagated solver failure (e.g. contraction failure at max subdivision
// depth).
struct SolveError : Error {
  using Error::Error;
};

// A quotient experiment ran out of basis budget before the eigenvalue
// stabilized; fitting a scaling law to unsaturated records is refused.
struct SaturationError : Error {
  using Error::Error;
};

}  // namespace hypershell
