#include "hho/analytic.hpp"

#include <cmath>

namespace hho {

namespace {

void check_domain(const Circle& c, double r) {
  if (r < c.radius - 1e-12) throw DomainError("cylinder field evaluated inside the cylinder");
}

}  // namespace

VectorJet CylinderSolution::velocity(const Point2& x) const {
  const double X = x.x() - circle.center.x(), Y = x.y() - circle.center.y();
  const double s = X * X + Y * Y;
  check_domain(circle, std::sqrt(s));
  const double R2 = circle.radius * circle.radius;
  // u_x = a(s)(X^2 - Y^2) + ln(s/R^2)/2, u_y = 2 a(s) X Y.
  const double a = (R2 - s) / (2.0 * s * s);
  const double da = (s - 2.0 * R2) / (2.0 * s * s * s);
  const double d = X * X - Y * Y;

  VectorJet j;
  j.value = U * Vector2(a * d + 0.5 * std::log(s / R2), 2.0 * a * X * Y);
  j.grad << 2.0 * da * X * d + 2.0 * a * X + X / s, 2.0 * da * Y * d - 2.0 * a * Y + Y / s,
      4.0 * da * X * X * Y + 2.0 * a * Y, 4.0 * da * X * Y * Y + 2.0 * a * X;
  j.grad *= U;
  j.lap = U * Vector2(2.0 * d / (s * s), 4.0 * X * Y / (s * s));
  return j;
}

ScalarJet CylinderSolution::pressure(const Point2& x) const {
  const double X = x.x() - circle.center.x(), Y = x.y() - circle.center.y();
  const double s = X * X + Y * Y;
  check_domain(circle, std::sqrt(s));
  ScalarJet j;
  j.value = C - 2.0 * U * X / s;
  j.grad = U * Vector2(2.0 * (X * X - Y * Y) / (s * s), 4.0 * X * Y / (s * s));
  j.lap = 0.0;
  return j;
}

VectorJet CylinderSolution::pressure_gradient(const Point2& x) const {
  const double X = x.x() - circle.center.x(), Y = x.y() - circle.center.y();
  const double s = X * X + Y * Y;
  check_domain(circle, std::sqrt(s));
  const double s2 = s * s, s3 = s2 * s, d = X * X - Y * Y;
  VectorJet j;
  j.value = U * Vector2(2.0 * d / s2, 4.0 * X * Y / s2);
  j.grad << 4.0 * X / s2 - 8.0 * X * d / s3, -4.0 * Y / s2 - 8.0 * Y * d / s3,
      4.0 * Y / s2 - 16.0 * X * X * Y / s3, 4.0 * X / s2 - 16.0 * X * Y * Y / s3;
  j.grad *= U;
  return j;
}

double stream_zeta1(double r, double R, double U) {
  if (r < R - 1e-12) throw DomainError("stream function evaluated inside the cylinder");
  return U * ((r * r - R * R) / (2.0 * r) - r * std::log(r / R));
}

double stream_zeta1_prime(double r, double R, double U) {
  if (r < R - 1e-12) throw DomainError("stream function evaluated inside the cylinder");
  return U * (R * R / (2.0 * r * r) - 0.5 - std::log(r / R));
}

VectorJet smooth_velocity(const Point2& p) {
  const double sx = std::sin(pi * p.x()), sy = std::sin(pi * p.y());
  const double s2x = std::sin(2.0 * pi * p.x()), s2y = std::sin(2.0 * pi * p.y());
  const double c2x = std::cos(2.0 * pi * p.x()), c2y = std::cos(2.0 * pi * p.y());
  VectorJet j;
  j.value = Vector2(0.5 * sx * sx * s2y, -0.5 * s2x * sy * sy);
  j.grad << 0.5 * pi * s2x * s2y, pi * sx * sx * c2y,
      -pi * c2x * sy * sy, -0.5 * pi * s2x * s2y;
  j.lap = pi * pi * Vector2(s2y * (2.0 * c2x - 1.0), s2x * (1.0 - 2.0 * c2y));
  return j;
}

ScalarJet smooth_pressure(const Point2& p) {
  const double a = p.x() - 0.5, b = p.y() - 0.5;
  ScalarJet j;
  j.value = a * b * b;
  j.grad = Vector2(b * b, 2.0 * a * b);
  j.lap = 2.0 * a;
  return j;
}

VectorJet ManufacturedSolution::velocity(const Point2& x) const {
  VectorJet j = cylinder.velocity(x);
  const VectorJet s = smooth_velocity(x);
  j.value += s.value;
  j.grad += s.grad;
  j.lap += s.lap;
  return j;
}

ScalarJet ManufacturedSolution::pressure(const Point2& x) const {
  ScalarJet j = cylinder.pressure(x);
  const ScalarJet s = smooth_pressure(x);
  j.value += s.value;
  j.grad += s.grad;
  j.lap += s.lap;
  return j;
}

Vector2 ManufacturedSolution::force(const Point2& x) const {
  return -smooth_velocity(x).lap + smooth_pressure(x).grad;
}

}  // namespace hho
