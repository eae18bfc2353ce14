#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace sgevem {

using Point2 = Eigen::Vector2d;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Error taxonomy. The CLI maps these onto exit codes.

/// Bad input: malformed files, invalid parameters, inconsistent topology.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Geometry that cannot support the discretization (nonconvex, zero length, ...).
class DegenerateMeshError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Singular local systems, failed factorizations, violated numerical contracts.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double cross2(const Point2& a, const Point2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace sgevem
