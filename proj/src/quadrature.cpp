#include "hho/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace hho {

namespace {

// Extra angular points for integrands that are trigonometric in the parameter.
constexpr int kCurvedExtraPoints = 4;
// Sub-chord length over center-to-line distance in curved sweeps.
constexpr double kMaxChordRatio = 0.25;

int points_for_degree(int degree) { return std::max(1, degree / 2 + 1); }

GaussLegendre compute_gauss_legendre(int n) {
  GaussLegendre gl;
  gl.nodes.resize(n);
  gl.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    // Recompute the derivative at the converged node.
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    gl.nodes[i] = -x;
    gl.nodes[n - 1 - i] = x;
    gl.weights[i] = gl.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) gl.nodes[n / 2] = 0.0;
  return gl;
}

void add_triangle(QuadratureRule& rule, const Point2& a, const Point2& b, const Point2& c, int degree) {
  const double jac = std::abs(cross(b - a, c - a));
  // Slivers produced by rays through a vertex.
  const double scale = std::max({(b - a).squaredNorm(), (c - a).squaredNorm(), (c - b).squaredNorm()});
  if (jac <= 1e-13 * scale) return;
  const auto& gs = gauss_legendre(points_for_degree(degree + 1));
  const auto& gt = gauss_legendre(points_for_degree(degree));
  for (std::size_t i = 0; i < gs.nodes.size(); ++i) {
    const double s = 0.5 * (gs.nodes[i] + 1.0);
    for (std::size_t j = 0; j < gt.nodes.size(); ++j) {
      const double t = 0.5 * (gt.nodes[j] + 1.0);
      rule.points.push_back((1.0 - s) * a + s * ((1.0 - t) * b + t * c));
      rule.weights.push_back(0.25 * gs.weights[i] * gt.weights[j] * s * jac);
    }
  }
}

// Geometric breakpoints 0, 2^-m, ..., 1/2, 1 on a ray segment from rho_in to
// rho_out, so the center (at t = -rho_in/(rho_out - rho_in)) stays at least one
// piece length away from every piece.
std::vector<double> radial_breaks(double rho_in, double rho_out) {
  const double ratio = (rho_out - rho_in) / rho_in;
  const int levels = ratio > 1.0 ? std::min(30, static_cast<int>(std::ceil(std::log2(ratio)))) : 0;
  std::vector<double> breaks{0.0};
  for (int l = levels; l >= 0; --l) breaks.push_back(std::ldexp(1.0, -l));
  return breaks;
}

// Region between the cylinder arc and a straight outer piece, swept by rays
// from the cylinder center through the segment [outer_a, outer_b]. The
// Jacobian is rational in the sweep parameter with poles at distance
// dist(center, line)/|chord| off the real axis, so the chord is cut into
// pieces short enough for Gauss-Legendre to converge to round-off. The radial
// direction is graded toward the arc when the sweep reaches far beyond R.
void add_curved_quad(QuadratureRule& rule, const Circle& circle, const Point2& outer_a, const Point2& outer_b,
                     int degree) {
  const auto& gu = gauss_legendre(points_for_degree(degree) + kCurvedExtraPoints);
  const auto& gt = gauss_legendre(points_for_degree(degree + 1));
  const Vector2 chord = outer_b - outer_a;
  const double line_distance = std::abs(cross(outer_a - circle.center, chord)) / chord.norm();
  const int pieces = std::max(1, static_cast<int>(std::ceil(chord.norm() / (kMaxChordRatio * line_distance))));
  const double R = circle.radius;
  for (int p = 0; p < pieces; ++p) {
    const Point2 a = outer_a + (static_cast<double>(p) / pieces) * chord;
    const Vector2 sub = chord / pieces;
    const double rho_max = std::max((a - circle.center).norm(), (a + sub - circle.center).norm());
    const std::vector<double> breaks = radial_breaks(R, rho_max);
    for (std::size_t i = 0; i < gu.nodes.size(); ++i) {
      const double u = 0.5 * (gu.nodes[i] + 1.0);
      const Vector2 v = a + u * sub - circle.center;
      const double rho_out = v.norm();
      const Vector2 e = v / rho_out;
      const double dtheta = std::abs(cross(v, sub)) / v.squaredNorm();
      for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
        const double t0 = breaks[b], t1 = breaks[b + 1];
        for (std::size_t j = 0; j < gt.nodes.size(); ++j) {
          const double t = t0 + 0.5 * (gt.nodes[j] + 1.0) * (t1 - t0);
          const double rho = R + t * (rho_out - R);
          rule.points.push_back(circle.center + rho * e);
          rule.weights.push_back(0.25 * gu.weights[i] * gt.weights[j] * (t1 - t0) * rho * (rho_out - R) * dtheta);
        }
      }
    }
  }
}

double wrap_angle(double a) {
  while (a <= -pi) a += 2.0 * pi;
  while (a > pi) a -= 2.0 * pi;
  return a;
}

struct LoopPiece {
  bool arc{false};
  Point2 a, b;  // segment endpoints
  double theta0{0.0}, theta1{0.0};
};

// Ray/line intersection distance; returns negative when parallel.
double ray_line(const Point2& origin, const Vector2& d, const Point2& p, const Point2& q, double* s_out = nullptr) {
  const Vector2 e = q - p;
  const double denom = cross(d, e);
  if (std::abs(denom) < 1e-300) return -1.0;
  const double r = cross(p - origin, e) / denom;
  if (s_out) *s_out = cross(p - origin, d) / denom;
  return r;
}

// Straight-sided quadrilateral (ia, oa, ob, ib) between two rays from `center`,
// cut by further rays and radial strips graded toward the center, then split
// into triangles. Exactness for polynomials is kept.
void add_graded_quad(QuadratureRule& rule, const Point2& center, const Point2& ia, const Point2& oa,
                     const Point2& ob, const Point2& ib, int degree) {
  const Vector2 inner = ib - ia;
  const double inner_len = inner.norm();
  if (inner_len == 0.0) {
    add_triangle(rule, ia, oa, ob, degree);
    return;
  }
  const double line_distance = std::abs(cross(ia - center, inner)) / inner_len;
  const int sectors = std::max(1, static_cast<int>(std::ceil(inner_len / line_distance)));
  std::vector<Point2> in{ia}, out{oa};
  for (int k = 1; k < sectors; ++k) {
    const Point2 p = ia + (static_cast<double>(k) / sectors) * inner;
    const Vector2 d = (p - center).normalized();
    in.push_back(p);
    out.push_back(center + ray_line(center, d, oa, ob) * d);
  }
  in.push_back(ib);
  out.push_back(ob);
  for (int k = 0; k < sectors; ++k) {
    const double rin = std::min((in[k] - center).norm(), (in[k + 1] - center).norm());
    const double rout = std::max((out[k] - center).norm(), (out[k + 1] - center).norm());
    const auto breaks = radial_breaks(rin, rout);
    for (std::size_t b = 0; b + 1 < breaks.size(); ++b) {
      const Point2 p0 = in[k] + breaks[b] * (out[k] - in[k]), p1 = in[k] + breaks[b + 1] * (out[k] - in[k]);
      const Point2 q0 = in[k + 1] + breaks[b] * (out[k + 1] - in[k + 1]);
      const Point2 q1 = in[k + 1] + breaks[b + 1] * (out[k + 1] - in[k + 1]);
      add_triangle(rule, p0, p1, q1, degree);
      add_triangle(rule, p0, q1, q0, degree);
    }
  }
}

QuadratureRule cut_element_rule(const Mesh& mesh, const Element& element, int degree) {
  const Circle& circle = mesh.cylinders[element.cut_cylinder];
  const Point2& c = circle.center;

  std::vector<LoopPiece> pieces;
  for (const auto& ref : element.faces) {
    const Face& f = mesh.faces[ref.face];
    if (f.is_arc()) {
      pieces.push_back({true, f.start(), f.end(), f.arc().theta0, f.arc().theta1});
    } else {
      pieces.push_back({false, f.segment().a, f.segment().b, 0.0, 0.0});
    }
  }

  Vector2 mean_dir(0.0, 0.0);
  for (const auto& v : element.vertices) mean_dir += (v - c).normalized();
  const double ref = std::atan2(mean_dir.y(), mean_dir.x());

  std::vector<double> angles;
  for (const auto& v : element.vertices) angles.push_back(wrap_angle(std::atan2(v.y() - c.y(), v.x() - c.x()) - ref));
  std::sort(angles.begin(), angles.end());

  // Sector rays pass through vertices; hits within round-off of one are moved onto it.
  auto snap = [&](const Point2& x) {
    for (const auto& v : element.vertices)
      if ((x - v).norm() <= 1e-12 * element.diameter) return v;
    return x;
  };

  QuadratureRule rule;
  rule.degree = degree;
  for (std::size_t i = 0; i + 1 < angles.size(); ++i) {
    const double a0 = angles[i], a1 = angles[i + 1];
    if (a1 - a0 < 1e-13) continue;
    const Vector2 dm = unit_direction(ref + 0.5 * (a0 + a1));

    struct Hit {
      double r;
      int piece;
    };
    std::vector<Hit> hits;
    for (std::size_t p = 0; p < pieces.size(); ++p) {
      const auto& pc = pieces[p];
      if (pc.arc) {
        double th = std::atan2(dm.y(), dm.x());
        while (th < pc.theta0) th += 2.0 * pi;
        while (th > pc.theta0 + 2.0 * pi) th -= 2.0 * pi;
        if (th <= pc.theta1) hits.push_back({circle.radius, static_cast<int>(p)});
      } else {
        double s = 0.0;
        const double r = ray_line(c, dm, pc.a, pc.b, &s);
        if (r > 0.0 && s >= 0.0 && s <= 1.0) hits.push_back({r, static_cast<int>(p)});
      }
    }
    std::sort(hits.begin(), hits.end(), [](const Hit& x, const Hit& y) { return x.r < y.r; });
    if (hits.size() % 2 != 0) throw QuadratureError("ray decomposition of a cut element failed");

    const Vector2 d0 = unit_direction(ref + a0), d1 = unit_direction(ref + a1);
    for (std::size_t h = 0; h + 1 < hits.size(); h += 2) {
      const auto& inner = pieces[hits[h].piece];
      const auto& outer = pieces[hits[h + 1].piece];
      if (outer.arc) throw QuadratureError("ray decomposition of a cut element failed");
      const Point2 oa = snap(c + ray_line(c, d0, outer.a, outer.b) * d0);
      const Point2 ob = snap(c + ray_line(c, d1, outer.a, outer.b) * d1);
      if (inner.arc) {
        add_curved_quad(rule, circle, oa, ob, degree);
      } else {
        const Point2 ia = snap(c + ray_line(c, d0, inner.a, inner.b) * d0);
        const Point2 ib = snap(c + ray_line(c, d1, inner.a, inner.b) * d1);
        add_graded_quad(rule, c, ia, oa, ob, ib, degree);
      }
    }
  }
  return rule;
}

// Pieces closer to a cylinder center than their own size are split, so the
// near-singular enrichment functions are integrated on a graded partition.
constexpr int kMaxGradingDepth = 12;

double box_distance(const Box& b, const Point2& p) {
  const double dx = std::max({b.x0 - p.x(), 0.0, p.x() - b.x1});
  const double dy = std::max({b.y0 - p.y(), 0.0, p.y() - b.y1});
  return std::hypot(dx, dy);
}

std::vector<Box> graded_boxes(const Box& box, const std::vector<Circle>& centers) {
  std::vector<Box> out;
  auto recurse = [&](auto&& self, const Box& b, int depth) -> void {
    const double size = std::max(b.width(), b.height());
    bool split = false;
    for (const Circle& c : centers) split = split || box_distance(b, c.center) < size;
    if (!split || depth == kMaxGradingDepth) {
      out.push_back(b);
      return;
    }
    const double xm = 0.5 * (b.x0 + b.x1), ym = 0.5 * (b.y0 + b.y1);
    self(self, Box{b.x0, xm, b.y0, ym}, depth + 1);
    self(self, Box{xm, b.x1, b.y0, ym}, depth + 1);
    self(self, Box{b.x0, xm, ym, b.y1}, depth + 1);
    self(self, Box{xm, b.x1, ym, b.y1}, depth + 1);
  };
  recurse(recurse, box, 0);
  return out;
}

std::vector<std::pair<double, double>> graded_intervals(const Point2& a, const Point2& b,
                                                        const std::vector<Circle>& centers) {
  std::vector<std::pair<double, double>> out;
  const double length = (b - a).norm();
  auto recurse = [&](auto&& self, double t0, double t1, int depth) -> void {
    bool split = false;
    for (const Circle& c : centers) {
      const double t = std::clamp((c.center - a).dot(b - a) / (length * length), t0, t1);
      split = split || (a + t * (b - a) - c.center).norm() < (t1 - t0) * length;
    }
    if (!split || depth == kMaxGradingDepth) {
      out.emplace_back(t0, t1);
      return;
    }
    const double tm = 0.5 * (t0 + t1);
    self(self, t0, tm, depth + 1);
    self(self, tm, t1, depth + 1);
  };
  recurse(recurse, 0.0, 1.0, 0);
  return out;
}

}  // namespace

double QuadratureRule::measure() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

const GaussLegendre& gauss_legendre(int npoints) {
  static std::map<int, GaussLegendre> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(npoints);
  if (it == cache.end()) it = cache.emplace(npoints, compute_gauss_legendre(npoints)).first;
  return it->second;
}

QuadratureRule face_rule(const Face& face, int degree, const std::vector<Circle>& grading) {
  if (degree < 0) throw QuadratureError("negative quadrature degree");
  QuadratureRule rule;
  rule.degree = degree;
  if (face.is_arc()) {
    const Arc& arc = face.arc();
    const auto& gl = gauss_legendre(points_for_degree(degree) + kCurvedExtraPoints);
    const double mid = 0.5 * (arc.theta0 + arc.theta1), half = 0.5 * (arc.theta1 - arc.theta0);
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double th = mid + half * gl.nodes[i];
      const Point2 x = arc.point(th);
      rule.points.push_back(x);
      rule.weights.push_back(gl.weights[i] * half * arc.circle.radius);
      rule.normals.push_back(face.normal_at(x));
      rule.params.push_back(gl.nodes[i]);
    }
  } else {
    const Segment& s = face.segment();
    const auto& gl = gauss_legendre(points_for_degree(degree));
    const Vector2 n = face.normal_at(s.a);
    const double length = (s.b - s.a).norm();
    for (const auto& [t0, t1] : graded_intervals(s.a, s.b, grading)) {
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double t = t0 + 0.5 * (gl.nodes[i] + 1.0) * (t1 - t0);
        rule.points.push_back(s.a + t * (s.b - s.a));
        rule.weights.push_back(0.5 * gl.weights[i] * (t1 - t0) * length);
        rule.normals.push_back(n);
        rule.params.push_back(2.0 * t - 1.0);
      }
    }
  }
  return rule;
}

QuadratureRule element_rule(const Mesh& mesh, const Element& element, int degree) {
  if (degree < 0) throw QuadratureError("negative quadrature degree");
  if (element.is_cut()) return cut_element_rule(mesh, element, degree);
  QuadratureRule rule;
  rule.degree = degree;
  const auto& gl = gauss_legendre(points_for_degree(degree));
  for (const Box& b : graded_boxes(element.cell, mesh.cylinders)) {
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      for (std::size_t j = 0; j < gl.nodes.size(); ++j) {
        rule.points.emplace_back(b.x0 + 0.5 * (gl.nodes[i] + 1.0) * b.width(),
                                 b.y0 + 0.5 * (gl.nodes[j] + 1.0) * b.height());
        rule.weights.push_back(0.25 * gl.weights[i] * gl.weights[j] * b.area());
      }
    }
  }
  return rule;
}

AdaptiveResult adaptive_integrate(const std::function<QuadratureRule(int)>& rule_at_degree,
                                  const std::function<double(const Point2&)>& integrand, int base_degree) {
  int degree = std::max(base_degree, 1);
  double prev = rule_at_degree(degree).integrate(integrand);
  for (int doubling = 0; doubling < 6; ++doubling) {
    degree *= 2;
    const double value = rule_at_degree(degree).integrate(integrand);
    const double diff = std::abs(value - prev);
    if (diff < 1e-11 * std::abs(value) || (std::abs(value) < 1e-2 && diff < 1e-13)) return {value, degree};
    prev = value;
  }
  throw QuadratureError("quadrature not converged");
}

}  // namespace hho
