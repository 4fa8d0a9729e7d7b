#pragma once

#include <functional>
#include <vector>

#include "hho/mesh.hpp"

namespace hho {

/// Integration nodes and positive weights over an element or a face.
///
/// Face rules additionally carry, per node, the face's stored unit normal and a
/// local coordinate in [-1, 1] (arc length for segments, angle for arcs).
struct QuadratureRule {
  std::vector<Point2> points;
  std::vector<double> weights;
  std::vector<Vector2> normals;
  std::vector<double> params;
  int degree{0};

  std::size_t size() const { return points.size(); }
  double measure() const;

  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) s += weights[i] * f(points[i]);
    return s;
  }
};

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;
};
const GaussLegendre& gauss_legendre(int npoints);

/// Exact for polynomials of total degree <= degree along segments; for arcs the
/// angular rule carries extra points so trigonometric integrands of the same
/// degree are resolved to round-off.
/// Segment rules are split toward the centers in `grading` (see element_rule).
QuadratureRule face_rule(const Face& face, int degree, const std::vector<Circle>& grading = {});

/// Exact for bivariate polynomials of total degree <= degree on uncut and
/// straight-sided pieces. Cut elements are decomposed in polar coordinates
/// about the cutting cylinder's center into straight triangles and
/// ray-parametrised curved quadrilaterals, so every node lies in the element
/// and every weight is positive. Uncut cells are split into a quadtree graded
/// toward nearby cylinder centers, where the enrichment functions peak.
QuadratureRule element_rule(const Mesh& mesh, const Element& element, int degree);

struct AdaptiveResult {
  double value{0.0};
  int degree{0};
};

/// Integrates with rules of doubling degree until two successive values agree
/// to 1e-11 relative (1e-13 absolute below 1e-2). Throws QuadratureError
/// ("quadrature not converged") after 6 doublings.
AdaptiveResult adaptive_integrate(const std::function<QuadratureRule(int)>& rule_at_degree,
                                  const std::function<double(const Point2&)>& integrand, int base_degree);

}  // namespace hho
