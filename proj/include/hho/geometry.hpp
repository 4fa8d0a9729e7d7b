#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace hho {

using Point2 = Eigen::Vector2d;
using Vector2 = Eigen::Vector2d;

inline constexpr double pi = std::numbers::pi;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class MeshError : public Error {
public:
  using Error::Error;
};

class QuadratureError : public Error {
public:
  using Error::Error;
};

class SolverError : public Error {
public:
  using Error::Error;
};

/// Evaluation of a closed-form field outside its domain of definition.
class DomainError : public Error {
public:
  using Error::Error;
};

struct Circle {
  Point2 center{0.0, 0.0};
  double radius{0.0};
};

/// Axis-aligned rectangle [x0,x1] x [y0,y1].
struct Box {
  double x0{0.0}, x1{0.0}, y0{0.0}, y1{0.0};

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  double area() const { return width() * height(); }
  bool contains_strictly(const Point2& p) const {
    return p.x() > x0 && p.x() < x1 && p.y() > y0 && p.y() < y1;
  }
};

inline double cross(const Vector2& a, const Vector2& b) { return a.x() * b.y() - a.y() * b.x(); }

inline Vector2 unit_direction(double theta) { return {std::cos(theta), std::sin(theta)}; }

/// Distance from p to the closest point of the box (0 when inside).
inline double distance_to_box(const Point2& p, const Box& b) {
  const double dx = std::max({b.x0 - p.x(), 0.0, p.x() - b.x1});
  const double dy = std::max({b.y0 - p.y(), 0.0, p.y() - b.y1});
  return std::hypot(dx, dy);
}

}  // namespace hho
