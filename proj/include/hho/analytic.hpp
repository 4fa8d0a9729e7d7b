#pragma once

// Closed-form fields: the creeping-flow solution around a cylinder and the
// manufactured solution built on top of it.

#include "hho/geometry.hpp"

namespace hho {

struct ScalarJet {
  double value{0.0};
  Vector2 grad{Vector2::Zero()};
  double lap{0.0};
};

/// grad(i, j) = d u_i / d x_j.
struct VectorJet {
  Vector2 value{Vector2::Zero()};
  Eigen::Matrix2d grad{Eigen::Matrix2d::Zero()};
  Vector2 lap{Vector2::Zero()};
};

/// Asymptotic Stokes flow past a cylinder with no-slip on its surface.
///
/// With X = x - c and r = |X|,
///   u = U [ (R^2 - r^2)/(2 r^4) ((X^2 - Y^2) e_x + 2 X Y e_y) + ln(r/R) e_x ],
///   p = C - 2 U X / r^2,
/// which satisfies -lap u + grad p = 0 and div u = 0 for unit viscosity.
struct CylinderSolution {
  Circle circle;
  double U{1.0};
  double C{0.0};

  /// Throws DomainError when |x - c| < R - 1e-12.
  VectorJet velocity(const Point2& x) const;
  ScalarJet pressure(const Point2& x) const;
  /// grad p as a vector field (equal to lap u); its gradient is the pressure Hessian.
  VectorJet pressure_gradient(const Point2& x) const;
};

/// zeta_1(r) = (r^2 - R^2)/(2r) - r ln(r/R), scaled by U. The stream function
/// U zeta_1(r) sin(theta) generates the cylinder velocity.
double stream_zeta1(double r, double R, double U = 1.0);
double stream_zeta1_prime(double r, double R, double U = 1.0);

/// Smooth divergence-free velocity
///   sin(pi x) sin(pi y) (sin(pi x) cos(pi y), -cos(pi x) sin(pi y))
/// and pressure (x - 1/2)(y - 1/2)^2.
VectorJet smooth_velocity(const Point2& x);
ScalarJet smooth_pressure(const Point2& x);

/// Cylinder solution plus the smooth part. The body force only sees the
/// smooth part since the cylinder pair solves the homogeneous problem.
struct ManufacturedSolution {
  CylinderSolution cylinder;

  VectorJet velocity(const Point2& x) const;
  ScalarJet pressure(const Point2& x) const;
  Vector2 force(const Point2& x) const;
  Vector2 boundary(const Point2& x) const { return velocity(x).value; }
};

}  // namespace hho
