#include "hho/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hho {

namespace {

double legendre(int m, double t) {
  if (m == 0) return 1.0;
  double p0 = 1.0, p1 = t;
  for (int n = 2; n <= m; ++n) {
    const double p2 = ((2.0 * n - 1.0) * t * p1 - (n - 1.0) * p0) / n;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double wrap(double a) {
  while (a <= -pi) a += 2.0 * pi;
  while (a > pi) a -= 2.0 * pi;
  return a;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

ScalarJet monomial_jet(const Point2& x, const Point2& center, double scale, int a, int b) {
  const double xi = (x.x() - center.x()) / scale, eta = (x.y() - center.y()) / scale;
  ScalarJet j;
  j.value = ipow(xi, a) * ipow(eta, b);
  j.grad = Vector2(a > 0 ? a * ipow(xi, a - 1) * ipow(eta, b) / scale : 0.0,
                   b > 0 ? b * ipow(xi, a) * ipow(eta, b - 1) / scale : 0.0);
  j.lap = ((a > 1 ? a * (a - 1) * ipow(xi, a - 2) * ipow(eta, b) : 0.0) +
           (b > 1 ? b * (b - 1) * ipow(xi, a) * ipow(eta, b - 2) : 0.0)) /
          (scale * scale);
  return j;
}

VectorJet component_jet(const ScalarJet& s, int c) {
  VectorJet j;
  j.value[c] = s.value;
  j.grad.row(c) = s.grad.transpose();
  j.lap[c] = s.lap;
  return j;
}

Eigen::MatrixXd spanning_values(const std::vector<ScalarField>& spanning, const std::vector<Point2>& points,
                                Eigen::MatrixXd* dx = nullptr, Eigen::MatrixXd* dy = nullptr) {
  const auto nq = static_cast<Eigen::Index>(points.size()), ns = static_cast<Eigen::Index>(spanning.size());
  Eigen::MatrixXd v(nq, ns);
  if (dx) dx->resize(nq, ns);
  if (dy) dy->resize(nq, ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    for (Eigen::Index q = 0; q < nq; ++q) {
      const ScalarJet jet = spanning[j].jet(points[q]);
      v(q, j) = jet.value;
      if (dx) (*dx)(q, j) = jet.grad.x();
      if (dy) (*dy)(q, j) = jet.grad.y();
    }
  }
  return v;
}

template <class Space>
void assign(Space& space, Orthonormalization&& o) {
  space.coefficients = std::move(o.coefficients);
  space.kept = std::move(o.kept);
  space.pruned = std::move(o.pruned);
  space.gram_condition = o.gram_condition;
}

std::vector<VectorField> to_vector_fields(const std::vector<ScalarField>& scalars) {
  std::vector<VectorField> out;
  for (const auto& s : scalars) {
    for (int c = 0; c < 2; ++c) {
      auto jet = s.jet;
      out.push_back({[jet, c](const Point2& x) { return component_jet(jet(x), c); },
                     s.label + (c == 0 ? " e_x" : " e_y")});
    }
  }
  return out;
}

}  // namespace

Orthonormalization orthonormalize(const Eigen::MatrixXd& w, double tolerance) {
  const Eigen::Index m = w.rows(), n = w.cols();
  Eigen::MatrixXd q(m, n), c = Eigen::MatrixXd::Zero(n, n);
  Orthonormalization out;
  int dim = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::VectorXd v = w.col(j);
    Eigen::VectorXd coef = Eigen::VectorXd::Zero(n);
    coef[j] = 1.0;
    const double own = v.norm();
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < dim; ++i) {
        const double r = q.col(i).dot(v);
        v -= r * q.col(i);
        coef -= r * c.col(i);
      }
    }
    const double res = v.norm();
    if (own > 0.0 && res > tolerance * own) {
      q.col(dim) = v / res;
      c.col(dim) = coef / res;
      ++dim;
      out.kept.push_back(static_cast<int>(j));
    } else {
      out.pruned.push_back(static_cast<int>(j));
    }
  }
  if (dim == 0) throw Error("all spanning functions are dependent or vanish");
  out.coefficients = c.leftCols(dim);

  Eigen::MatrixXd kept(m, dim);
  for (int i = 0; i < dim; ++i) kept.col(i) = w.col(out.kept[i]);
  const Eigen::VectorXd sv = Eigen::BDCSVD<Eigen::MatrixXd>(kept).singularValues();
  out.gram_condition = std::pow(sv[0] / sv[sv.size() - 1], 2);
  return out;
}

ScalarSpace prune_dependent(std::vector<ScalarField> spanning, const QuadratureRule& rule, double tolerance) {
  ScalarSpace space;
  space.spanning = std::move(spanning);
  Eigen::MatrixXd v = spanning_values(space.spanning, rule.points);
  for (Eigen::Index q = 0; q < v.rows(); ++q) v.row(q) *= std::sqrt(rule.weights[q]);
  assign(space, orthonormalize(v, tolerance));
  return space;
}

VectorSpace prune_dependent(std::vector<VectorField> spanning, const QuadratureRule& rule, double tolerance) {
  VectorSpace space;
  space.spanning = std::move(spanning);
  const auto nq = static_cast<Eigen::Index>(rule.size()), ns = static_cast<Eigen::Index>(space.spanning.size());
  Eigen::MatrixXd v(2 * nq, ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Vector2 val = space.spanning[j].jet(rule.points[q]).value * std::sqrt(rule.weights[q]);
      v(q, j) = val.x();
      v(nq + q, j) = val.y();
    }
  }
  assign(space, orthonormalize(v, tolerance));
  return space;
}

FaceSpace prune_dependent(std::vector<FaceField> spanning, const QuadratureRule& rule, double tolerance) {
  FaceSpace space;
  space.spanning = std::move(spanning);
  const auto nq = static_cast<Eigen::Index>(rule.size()), ns = static_cast<Eigen::Index>(space.spanning.size());
  Eigen::MatrixXd v(2 * nq, ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Vector2 val =
          space.spanning[j].value({rule.points[q], rule.normals[q], rule.params[q]}) * std::sqrt(rule.weights[q]);
      v(q, j) = val.x();
      v(nq + q, j) = val.y();
    }
  }
  assign(space, orthonormalize(v, tolerance));
  return space;
}

std::vector<ScalarField> scalar_monomials(const Element& element, int degree) {
  std::vector<ScalarField> out;
  const Point2 center = element.centroid;
  const double scale = 0.5 * element.diameter;
  for (int d = 0; d <= degree; ++d) {
    for (int b = 0; b <= d; ++b) {
      const int a = d - b;
      out.push_back({[center, scale, a, b](const Point2& x) { return monomial_jet(x, center, scale, a, b); },
                     "m" + std::to_string(a) + std::to_string(b)});
    }
  }
  return out;
}

std::vector<VectorField> vector_monomials(const Element& element, int degree) {
  return to_vector_fields(scalar_monomials(element, degree));
}

ScalarSpace element_poly_basis_scalar(const Element& element, int degree, const QuadratureRule& rule) {
  return prune_dependent(scalar_monomials(element, degree), rule);
}

VectorSpace element_poly_basis_vector(const Element& element, int degree, const QuadratureRule& rule) {
  return prune_dependent(vector_monomials(element, degree), rule);
}

std::vector<FaceField> face_poly_spanning(const Face& face, int k) {
  std::vector<FaceField> out;
  if (!face.is_arc()) {
    for (int m = 0; m <= k; ++m) {
      for (int c = 0; c < 2; ++c) {
        out.push_back({[m, c](const FacePoint& p) {
                         Vector2 v = Vector2::Zero();
                         v[c] = legendre(m, p.param);
                         return v;
                       },
                       "L" + std::to_string(m) + (c == 0 ? " e_x" : " e_y")});
      }
    }
    return out;
  }
  const Arc arc = face.arc();
  const double mid = 0.5 * (arc.theta0 + arc.theta1);
  const double tmax = std::tan(0.25 * (arc.theta1 - arc.theta0));
  const int K = k + 1;
  for (int m = 0; m <= 2 * K; ++m) {
    for (int c = 0; c < 2; ++c) {
      out.push_back({[arc, mid, tmax, K, m, c](const FacePoint& p) {
                       const Vector2 X = p.x - arc.circle.center;
                       const double t = std::tan(0.5 * wrap(std::atan2(X.y(), X.x()) - mid));
                       Vector2 v = Vector2::Zero();
                       v[c] = legendre(m, t / tmax) / ipow(1.0 + t * t, K);
                       return v;
                     },
                     "R" + std::to_string(m) + (c == 0 ? " e_x" : " e_y")});
    }
  }
  return out;
}

FaceSpace curved_face_basis(const Face& face, int k, const QuadratureRule& rule) {
  return prune_dependent(face_poly_spanning(face, k), rule);
}

std::vector<int> active_cylinders(const Element& element, const EnrichmentConfig& config) {
  std::vector<int> out;
  if (config.gamma <= 0.0) return out;
  for (std::size_t i = 0; i < config.cylinders.size(); ++i) {
    const Circle& c = config.cylinders[i];
    if ((element.centroid - c.center).norm() - c.radius <= config.gamma) out.push_back(static_cast<int>(i));
  }
  return out;
}

EnrichmentSets enrichment_sets(const Element& element, const EnrichmentConfig& config) {
  EnrichmentSets sets;
  for (int i : active_cylinders(element, config)) {
    const CylinderSolution sol{config.cylinders[i], config.U, 0.0};
    sets.psi.push_back({[sol](const Point2& x) { return sol.velocity(x); }, "u_hat" + std::to_string(i)});
    sets.phi.push_back({[sol](const Point2& x) { return sol.pressure(x); }, "p_hat" + std::to_string(i)});
  }
  return sets;
}

LocalSpaces build_local_spaces(const Element& element, int k, const EnrichmentConfig& config,
                               const QuadratureRule& rule) {
  LocalSpaces spaces;
  spaces.cylinders = active_cylinders(element, config);
  const EnrichmentSets sets = enrichment_sets(element, config);

  auto recon = vector_monomials(element, k + 1);
  recon.insert(recon.end(), sets.psi.begin(), sets.psi.end());
  spaces.recon = prune_dependent(std::move(recon), rule);

  auto cell = vector_monomials(element, k);
  for (int i : spaces.cylinders) {
    const CylinderSolution sol{config.cylinders[i], config.U, 0.0};
    // lap u_hat and grad p_hat coincide; both are listed and pruning keeps one.
    cell.push_back({[sol](const Point2& x) { return sol.pressure_gradient(x); }, "lap u_hat" + std::to_string(i)});
    cell.push_back({[sol](const Point2& x) {
                      const ScalarJet p = sol.pressure(x);
                      return VectorJet{p.grad, sol.pressure_gradient(x).grad, Vector2::Zero()};
                    },
                    "grad p_hat" + std::to_string(i)});
  }
  spaces.cell = prune_dependent(std::move(cell), rule);

  auto pressure = scalar_monomials(element, k);
  pressure.insert(pressure.end(), sets.phi.begin(), sets.phi.end());
  spaces.pressure = prune_dependent(std::move(pressure), rule);
  return spaces;
}

FaceSpace build_face_space(const Mesh& mesh, const Face& face, int k, const EnrichmentConfig& config,
                           const QuadratureRule& rule) {
  auto spanning = face_poly_spanning(face, k);
  std::set<int> cylinders;
  for (int e : face.elements) {
    if (e < 0) continue;
    for (int i : active_cylinders(mesh.elements[e], config)) cylinders.insert(i);
  }
  for (int i : cylinders) {
    const CylinderSolution sol{config.cylinders[i], config.U, 0.0};
    spanning.push_back(
        {[sol](const FacePoint& p) { return Vector2(sol.velocity(p.x).grad * p.normal); }, "grad u_hat n" + std::to_string(i)});
    spanning.push_back({[sol](const FacePoint& p) { return Vector2(sol.pressure(p.x).value * p.normal); },
                        "p_hat n" + std::to_string(i)});
  }
  return prune_dependent(std::move(spanning), rule);
}

ScalarTable tabulate(const ScalarSpace& space, const std::vector<Point2>& points) {
  Eigen::MatrixXd dx, dy;
  const Eigen::MatrixXd v = spanning_values(space.spanning, points, &dx, &dy);
  return {v * space.coefficients, dx * space.coefficients, dy * space.coefficients};
}

VectorTable tabulate(const VectorSpace& space, const std::vector<Point2>& points) {
  const auto nq = static_cast<Eigen::Index>(points.size()), ns = static_cast<Eigen::Index>(space.spanning.size());
  std::array<Eigen::MatrixXd, 8> raw;
  for (auto& m : raw) m.resize(nq, ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    for (Eigen::Index q = 0; q < nq; ++q) {
      const VectorJet jet = space.spanning[j].jet(points[q]);
      raw[0](q, j) = jet.value.x();
      raw[1](q, j) = jet.value.y();
      raw[2](q, j) = jet.grad(0, 0);
      raw[3](q, j) = jet.grad(0, 1);
      raw[4](q, j) = jet.grad(1, 0);
      raw[5](q, j) = jet.grad(1, 1);
      raw[6](q, j) = jet.lap.x();
      raw[7](q, j) = jet.lap.y();
    }
  }
  const auto& c = space.coefficients;
  return {raw[0] * c, raw[1] * c, raw[2] * c, raw[3] * c, raw[4] * c, raw[5] * c, raw[6] * c, raw[7] * c};
}

FaceTable tabulate(const FaceSpace& space, const QuadratureRule& rule) {
  const auto nq = static_cast<Eigen::Index>(rule.size()), ns = static_cast<Eigen::Index>(space.spanning.size());
  Eigen::MatrixXd vx(nq, ns), vy(nq, ns);
  for (Eigen::Index j = 0; j < ns; ++j) {
    for (Eigen::Index q = 0; q < nq; ++q) {
      const Vector2 v = space.spanning[j].value({rule.points[q], rule.normals[q], rule.params[q]});
      vx(q, j) = v.x();
      vy(q, j) = v.y();
    }
  }
  return {vx * space.coefficients, vy * space.coefficients};
}

Eigen::VectorXd evaluate(const ScalarSpace& space, const Point2& x) {
  Eigen::VectorXd s(space.spanning.size());
  for (std::size_t j = 0; j < space.spanning.size(); ++j) s[j] = space.spanning[j].jet(x).value;
  return space.coefficients.transpose() * s;
}

Eigen::Matrix2Xd evaluate(const VectorSpace& space, const Point2& x) {
  Eigen::Matrix2Xd s(2, space.spanning.size());
  for (std::size_t j = 0; j < space.spanning.size(); ++j) s.col(j) = space.spanning[j].jet(x).value;
  return s * space.coefficients;
}

}  // namespace hho
