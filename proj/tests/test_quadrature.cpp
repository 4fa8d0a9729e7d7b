#include "doctest.h"

#include <cmath>
#include <random>

#include "hho/mesh.hpp"
#include "hho/quadrature.hpp"

using namespace hho;

namespace {

Face make_segment(Point2 a, Point2 b) {
  Face f;
  f.geometry = Segment{a, b};
  f.length = f.diameter = (b - a).norm();
  return f;
}

Face make_arc(Circle c, double t0, double t1) {
  Face f;
  f.geometry = Arc{0, c, t0, t1};
  f.kind = BoundaryKind::cylinder_boundary;
  f.length = c.radius * (t1 - t0);
  return f;
}

// Random polynomial sum c_ab x^a y^b with a + b <= degree.
struct Poly {
  int degree;
  std::vector<double> c;
  Poly(int d, std::mt19937& gen) : degree(d) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int a = 0; a <= d; ++a)
      for (int b = 0; a + b <= d; ++b) c.push_back(u(gen));
  }
  double operator()(const Point2& x) const {
    double s = 0.0;
    int i = 0;
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) s += c[i++] * std::pow(x.x(), a) * std::pow(x.y(), b);
    return s;
  }
  // Antiderivative in x, so that the divergence of (P, 0) is the polynomial.
  double x_primitive(const Point2& x) const {
    double s = 0.0;
    int i = 0;
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) s += c[i++] * std::pow(x.x(), a + 1) / (a + 1) * std::pow(x.y(), b);
    return s;
  }
};

double boundary_oracle(const Mesh& mesh, const Element& e, const Poly& p) {
  double s = 0.0;
  for (const auto& ref : e.faces) {
    const Face& f = mesh.faces[ref.face];
    const auto rule = face_rule(f, 40);
    for (std::size_t q = 0; q < rule.size(); ++q)
      s += rule.weights[q] * p.x_primitive(rule.points[q]) * mesh.outward_normal(ref, rule.points[q]).x();
  }
  return s;
}

}  // namespace

TEST_CASE("Gauss-Legendre nodes and weights") {
  for (int n = 1; n <= 30; ++n) {
    const auto& gl = gauss_legendre(n);
    double sum = 0.0;
    for (double w : gl.weights) sum += w;
    CHECK(sum == doctest::Approx(2.0).epsilon(1e-14));
    // Exact for x^(2n-2).
    double m = 0.0;
    for (int i = 0; i < n; ++i) m += gl.weights[i] * std::pow(gl.nodes[i], 2 * n - 2);
    CHECK(m == doctest::Approx(2.0 / (2 * n - 1)).epsilon(1e-13));
  }
}

TEST_CASE("face rules") {
  const Face seg = make_segment({0.25, 0.5}, {0.5, 0.5});
  CHECK(face_rule(seg, 0).measure() == doctest::Approx(0.25).epsilon(1e-15));

  const Face arc = make_arc({{0.5, 0.5}, 0.1}, 0.0, pi / 2);
  CHECK(face_rule(arc, 0).measure() == doctest::Approx(pi * 0.1 / 2).epsilon(1e-13));

  const Face unit = make_segment({0.0, 0.0}, {1.0, 0.0});
  const auto rule = face_rule(unit, 2);
  CHECK(rule.integrate([](const Point2& x) { return x.x() * x.x(); }) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  // Trigonometric integrand on an arc: integral of x over the quarter arc about the origin.
  const Face a0 = make_arc({{0.0, 0.0}, 1.0}, 0.0, pi / 2);
  CHECK(face_rule(a0, 2).integrate([](const Point2& x) { return x.x(); }) == doctest::Approx(1.0).epsilon(1e-13));
  for (const double p : face_rule(a0, 5).params) {
    CHECK(p >= -1.0);
    CHECK(p <= 1.0);
  }
}

TEST_CASE("uncut element rules") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {});
  CHECK(element_rule(mesh, mesh.elements[10], 0).measure() == doctest::Approx(1.0 / 64).epsilon(1e-15));

  const Mesh m2 = build_cartesian_cut_mesh(2, {});
  double s = 0.0;
  for (const auto& e : m2.elements) s += element_rule(m2, e, 2).integrate([](const Point2& x) { return x.x() * x.y(); });
  CHECK(s == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("cell minus a circular segment") {
  const Circle c{{0.375, 0.45}, 0.1};
  const Mesh mesh = build_cartesian_cut_mesh(4, {c});
  const auto id = mesh.locate({0.3, 0.7});
  REQUIRE(id.has_value());
  const Element& e = mesh.elements[*id];
  REQUIRE(e.is_cut());
  const double d = 0.05, R = c.radius;
  const double segment = R * R * std::acos(d / R) - d * std::sqrt(R * R - d * d);
  const double expected = 1.0 / 16.0 - segment;
  CHECK(std::abs(element_rule(mesh, e, 0).measure() - expected) < 1e-14);
  CHECK(std::abs(e.area - expected) < 1e-14);
}

TEST_CASE("polynomial exactness on cut elements") {
  std::mt19937 gen(11);
  const std::vector<std::pair<std::vector<Circle>, std::vector<int>>> configs = {
      {{{{0.5, 0.5}, 0.1}}, {4, 8, 16}},
      {{{{0.375, 0.45}, 0.1}}, {4, 8, 16}},
      {{{{0.6, 0.6}, 0.02}}, {4, 8, 16}},
      {{{{0.4, 0.275}, 0.01}, {{0.2, 0.25}, 0.02}, {{0.7, 0.5}, 0.075}, {{0.3, 0.75}, 0.015}}, {7, 14}},
  };
  for (const auto& [cyl, sizes] : configs) {
    for (int n : sizes) {
      const Mesh mesh = build_cartesian_cut_mesh(n, cyl);
      for (const auto& e : mesh.elements) {
        if (!e.is_cut()) continue;
        for (int degree : {0, 3, 6}) {
          const Poly p(degree, gen);
          const auto rule = element_rule(mesh, e, degree);
          const double oracle = boundary_oracle(mesh, e, p);
          const double value = rule.integrate(p);
          double scale = 0.0;
          for (std::size_t q = 0; q < rule.size(); ++q) scale += rule.weights[q] * std::abs(p(rule.points[q]));
          CHECK(std::abs(value - oracle) <= 1e-11 * scale);
          for (double w : rule.weights) CHECK(w > 0.0);
          for (const auto& x : rule.points) CHECK(mesh.contains(e, x));
        }
      }
    }
  }
}

TEST_CASE("additivity across a refinement") {
  const Circle c{{0.5, 0.5}, 0.1};
  auto f = [](const Point2& x) { return std::exp(x.x()) * std::cos(3.0 * x.y()); };
  auto total = [&](int n) {
    const Mesh mesh = build_cartesian_cut_mesh(n, {c});
    double s = 0.0;
    for (const auto& e : mesh.elements) s += element_rule(mesh, e, 20).integrate(f);
    return s;
  };
  CHECK(std::abs(total(8) - total(16)) < 1e-12);
}

TEST_CASE("adaptive integration") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {{{0.5, 0.5}, 0.1}});
  const Element& e = mesh.elements[27];
  auto rules = [&](int d) { return element_rule(mesh, e, d); };
  const auto r = adaptive_integrate(rules, [](const Point2&) { return 1.0; }, 4);
  CHECK(r.value == doctest::Approx(e.area).epsilon(1e-13));
  CHECK(r.degree == 8);

  // Oscillation that no rule of moderate degree resolves.
  const Face seg = make_segment({0.0, 0.0}, {1.0, 0.0});
  CHECK_THROWS_WITH_AS(adaptive_integrate([&](int d) { return face_rule(seg, d); },
                                          [](const Point2& x) { return std::sin(1e5 * x.x()) + 1.0; }, 2),
                       "quadrature not converged", QuadratureError);
}
