#include "doctest.h"

#include <cmath>
#include <random>

#include "hho/local_ops.hpp"
#include "hho/spaces.hpp"

using namespace hho;

namespace {

const Circle kCylinder{{0.5, 0.5}, 0.1};

template <class Table>
Eigen::MatrixXd gram(const Table& t, const QuadratureRule& rule) {
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.weights.size());
  return t.vx.transpose() * w.asDiagonal() * t.vx + t.vy.transpose() * w.asDiagonal() * t.vy;
}

// Relative L2 residual of samples `f` (2 x nq) after projection onto an orthonormal table.
double residual(const Eigen::VectorXd& fx, const Eigen::VectorXd& fy, const Eigen::MatrixXd& bx,
                const Eigen::MatrixXd& by, const QuadratureRule& rule) {
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.weights.size());
  const Eigen::VectorXd c = bx.transpose() * w.asDiagonal() * fx + by.transpose() * w.asDiagonal() * fy;
  const Eigen::VectorXd rx = fx - bx * c, ry = fy - by * c;
  const double norm2 = w.dot(fx.cwiseProduct(fx)) + w.dot(fy.cwiseProduct(fy));
  const double res2 = w.dot(rx.cwiseProduct(rx)) + w.dot(ry.cwiseProduct(ry));
  return norm2 > 0.0 ? std::sqrt(std::max(res2, 0.0) / norm2) : 0.0;
}

Face quarter_arc() {
  Face f;
  f.geometry = Arc{0, kCylinder, 0.0, pi / 2};
  f.kind = BoundaryKind::cylinder_boundary;
  f.length = kCylinder.radius * pi / 2;
  return f;
}

// {e_x, e_y} together with m e_i n_j for scalar monomials m of degree <= k.
std::vector<FaceField> literal_arc_spanning(const Face& face, int k) {
  std::vector<FaceField> out;
  out.push_back({[](const FacePoint&) { return Vector2(1.0, 0.0); }, "e_x"});
  out.push_back({[](const FacePoint&) { return Vector2(0.0, 1.0); }, "e_y"});
  const Point2 c = face.arc().circle.center;
  for (int d = 0; d <= k; ++d)
    for (int b = 0; b <= d; ++b)
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) {
          const int a = d - b;
          out.push_back({[=](const FacePoint& p) {
                           const double m = std::pow((p.x.x() - c.x()) * 10.0, a) * std::pow((p.x.y() - c.y()) * 10.0, b);
                           Vector2 v = Vector2::Zero();
                           v[i] = m * p.normal[j];
                           return v;
                         },
                         "m n"});
        }
  return out;
}

}  // namespace

TEST_CASE("element polynomial bases") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {kCylinder});
  for (const auto& e : mesh.elements) {
    const auto rule = element_rule(mesh, e, 8);
    const ScalarSpace s0 = element_poly_basis_scalar(e, 0, rule);
    REQUIRE(s0.dim() == 1);
    CHECK(evaluate(s0, rule.points[0])[0] == doctest::Approx(1.0 / std::sqrt(e.area)).epsilon(1e-12));
    const VectorSpace v1 = element_poly_basis_vector(e, 1, rule);
    CHECK(v1.dim() == 6);
    const VectorSpace v2 = element_poly_basis_vector(e, 2, rule);
    CHECK(v2.dim() == 12);
    const Eigen::MatrixXd g = gram(tabulate(v2, rule.points), rule);
    CHECK((g - Eigen::MatrixXd::Identity(12, 12)).norm() < 1e-12);
  }
}

TEST_CASE("segment face bases") {
  Face f;
  f.geometry = Segment{{0.25, 0.5}, {0.5, 0.5}};
  const auto rule = face_rule(f, 8);
  CHECK(curved_face_basis(f, 0, rule).dim() == 2);
  CHECK(curved_face_basis(f, 1, rule).dim() == 4);
  CHECK(curved_face_basis(f, 2, rule).dim() == 6);
}

TEST_CASE("arc face basis spans the literal spanning set") {
  const Face arc = quarter_arc();
  for (int k : {0, 1, 2}) {
    for (int degree : {12, 24}) {
      const auto rule = face_rule(arc, degree);
      const FaceSpace space = curved_face_basis(arc, k, rule);
      CHECK(space.dim() == 4 * k + 6);
      const FaceSpace literal = prune_dependent(literal_arc_spanning(arc, k), rule);
      CHECK(literal.dim() == space.dim());
      const FaceTable t = tabulate(space, rule);
      for (const auto& fld : literal_arc_spanning(arc, k)) {
        Eigen::VectorXd fx(rule.size()), fy(rule.size());
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const Vector2 v = fld.value({rule.points[q], rule.normals[q], rule.params[q]});
          fx[q] = v.x(), fy[q] = v.y();
        }
        CHECK(residual(fx, fy, t.vx, t.vy, rule) < 1e-9);
      }
      const Eigen::MatrixXd g = gram(t, rule);
      CHECK((g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).norm() < 1e-10);
    }
  }
}

TEST_CASE("arc face dimension is stable in the tolerance") {
  const Face arc = quarter_arc();
  const auto rule = face_rule(arc, 20);
  for (int k : {0, 1}) {
    CHECK(prune_dependent(face_poly_spanning(arc, k), rule, 1e-8).dim() ==
          prune_dependent(face_poly_spanning(arc, k), rule, 1e-12).dim());
  }
}

TEST_CASE("pruning dependent spanning sets") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {kCylinder});
  const Element& e = mesh.elements[0];
  const auto rule = element_rule(mesh, e, 6);
  std::vector<ScalarField> s;
  s.push_back({[](const Point2&) { return ScalarJet{1.0, Vector2::Zero(), 0.0}; }, "1"});
  s.push_back({[](const Point2& x) { return ScalarJet{x.x(), Vector2(1, 0), 0.0}; }, "x"});
  s.push_back({[](const Point2& x) { return ScalarJet{1.0 + x.x(), Vector2(1, 0), 0.0}; }, "1+x"});
  const ScalarSpace space = prune_dependent(s, rule);
  CHECK(space.dim() == 2);
  CHECK(space.pruned == std::vector<int>{2});

  const CylinderSolution sol{kCylinder};
  std::vector<VectorField> u(2, VectorField{[sol](const Point2& x) { return sol.velocity(x); }, "u_hat"});
  CHECK(prune_dependent(u, rule).dim() == 1);

  std::vector<ScalarField> zero{{[](const Point2&) { return ScalarJet{}; }, "0"}};
  CHECK_THROWS_AS(prune_dependent(zero, rule), Error);
}

TEST_CASE("enrichment cutoff") {
  Element e;
  e.centroid = kCylinder.center + Vector2(0.25, 0.0);
  EnrichmentConfig none{0.0, {kCylinder}};
  CHECK(enrichment_sets(e, none).psi.empty());
  CHECK(enrichment_sets(e, none).phi.empty());
  EnrichmentConfig cfg{0.2, {kCylinder}};
  CHECK(enrichment_sets(e, cfg).psi.size() == 1);
  CHECK(enrichment_sets(e, cfg).phi.size() == 1);
  e.centroid = kCylinder.center + Vector2(0.0, 0.31);
  CHECK(enrichment_sets(e, cfg).psi.empty());
}

TEST_CASE("four-cylinder enrichment counts") {
  const std::vector<Circle> cyl = {{{0.4, 0.275}, 0.01}, {{0.2, 0.25}, 0.02}, {{0.7, 0.5}, 0.075}, {{0.3, 0.75}, 0.015}};
  const Mesh mesh = build_cartesian_cut_mesh(14, cyl);
  const EnrichmentConfig cfg{0.2, cyl};
  std::vector<int> histogram(5, 0);
  for (const auto& e : mesh.elements) {
    int brute = 0;
    for (const auto& c : cyl) brute += (e.centroid - c.center).norm() - c.radius <= 0.2 ? 1 : 0;
    const auto sets = enrichment_sets(e, cfg);
    CHECK(static_cast<int>(sets.psi.size()) == brute);
    ++histogram[brute];
  }
  // Overlapping cutoff discs produce elements enriched by two or more cylinders.
  CHECK(histogram[0] > 0);
  CHECK(histogram[1] > 0);
  CHECK(histogram[2] > 0);
}

TEST_CASE("local space dimensions") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {kCylinder});
  const Element& e = mesh.elements[*mesh.locate({0.61, 0.56})];
  const auto rule = element_rule(mesh, e, 16);
  const LocalSpaces plain = build_local_spaces(e, 0, {0.0, {kCylinder}}, rule);
  CHECK(plain.recon.dim() == 6);
  CHECK(plain.cell.dim() == 2);
  CHECK(plain.pressure.dim() == 1);
  const LocalSpaces rich = build_local_spaces(e, 0, {0.2, {kCylinder}}, rule);
  CHECK(rich.recon.dim() == 7);
  CHECK(rich.cell.dim() == 3);
  CHECK(rich.cell.pruned.size() == 1);
  CHECK(rich.pressure.dim() == 2);
  const LocalSpaces rich1 = build_local_spaces(e, 1, {0.2, {kCylinder}}, rule);
  CHECK(rich1.recon.dim() == 13);
  CHECK(rich1.cell.dim() == 7);
  CHECK(rich1.pressure.dim() == 4);

  // Pressure basis: constant first, the rest mean-free.
  const ScalarTable t = tabulate(rich1.pressure, rule.points);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.weights.size());
  CHECK((t.value.col(0).array() - 1.0 / std::sqrt(e.area)).abs().maxCoeff() < 1e-10 / std::sqrt(e.area));
  for (int j = 1; j < rich1.pressure.dim(); ++j) CHECK(std::abs(w.dot(t.value.col(j))) < 1e-12 * std::sqrt(e.area));
}

TEST_CASE("face spaces gain the two enrichment traces") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {kCylinder});
  const EnrichmentConfig cfg{0.2, {kCylinder}};
  int checked = 0;
  for (const auto& f : mesh.faces) {
    if (f.is_boundary()) continue;
    const bool both = !active_cylinders(mesh.elements[f.elements[0]], cfg).empty() &&
                      !active_cylinders(mesh.elements[f.elements[1]], cfg).empty();
    if (!both) continue;
    // p_hat vanishes on the vertical line through the center.
    if (!f.is_arc() && f.segment().a.x() == kCylinder.center.x() && f.segment().b.x() == kCylinder.center.x()) continue;
    const auto rule = face_rule(f, 16);
    const FaceSpace plain = build_face_space(mesh, f, 1, {0.0, {kCylinder}}, rule);
    const FaceSpace rich = build_face_space(mesh, f, 1, cfg, rule);
    // The traces from the two owners differ only in sign.
    std::vector<FaceField> doubled = rich.spanning;
    const CylinderSolution sol{kCylinder};
    doubled.push_back({[sol](const FacePoint& p) { return Vector2(-(sol.velocity(p.x).grad * p.normal)); }, "-grad u n"});
    doubled.push_back({[sol](const FacePoint& p) { return Vector2(-sol.pressure(p.x).value * p.normal); }, "-p n"});
    CHECK(rich.dim() == plain.dim() + 2);
    CHECK(prune_dependent(doubled, rule).dim() == plain.dim() + 2);
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("inclusions and orthonormality on every element") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {kCylinder});
  for (int k : {0, 1}) {
    for (double gamma : {0.0, 0.2}) {
      const Discretization disc = build_discretization(mesh, k, {gamma, {kCylinder}});
      for (const auto& e : mesh.elements) {
        const LocalContext ctx = make_context(disc, e.id);
        const auto& rule = ctx.rule();
        const Eigen::MatrixXd gr = gram(ctx.recon, rule);
        CHECK((gr - Eigen::MatrixXd::Identity(gr.rows(), gr.cols())).norm() < 1e-10);
        const Eigen::MatrixXd gc = gram(ctx.cell, rule);
        CHECK((gc - Eigen::MatrixXd::Identity(gc.rows(), gc.cols())).norm() < 1e-10);

        // lap w in V_T for every w in V_recon, grad q in V_T for every q in Q_T.
        for (Eigen::Index j = 0; j < ctx.recon.vx.cols(); ++j)
          CHECK(residual(ctx.recon.lx.col(j), ctx.recon.ly.col(j), ctx.cell.vx, ctx.cell.vy, rule) < 1e-9);
        for (Eigen::Index j = 0; j < ctx.pressure.value.cols(); ++j)
          CHECK(residual(ctx.pressure.dx.col(j), ctx.pressure.dy.col(j), ctx.cell.vx, ctx.cell.vy, rule) < 1e-9);

        for (std::size_t f = 0; f < e.faces.size(); ++f) {
          const auto& fr = ctx.face_rule(static_cast<int>(f));
          const auto& fb = ctx.face_basis[f];
          const Eigen::MatrixXd gf = gram(fb, fr);
          CHECK((gf - Eigen::MatrixXd::Identity(gf.rows(), gf.cols())).norm() < 1e-10);
          const auto& t = ctx.face_recon[f];
          const auto& n = ctx.face_normals[f];
          for (Eigen::Index j = 0; j < t.vx.cols(); ++j) {
            Eigen::VectorXd gx(fr.size()), gy(fr.size());
            for (std::size_t q = 0; q < fr.size(); ++q) {
              gx[q] = t.gxx(q, j) * n[q].x() + t.gxy(q, j) * n[q].y();
              gy[q] = t.gyx(q, j) * n[q].x() + t.gyy(q, j) * n[q].y();
            }
            CHECK(residual(gx, gy, fb.vx, fb.vy, fr) < 1e-9);
          }
          const auto& p = ctx.face_pressure[f];
          for (Eigen::Index j = 0; j < p.value.cols(); ++j) {
            Eigen::VectorXd qx(fr.size()), qy(fr.size());
            for (std::size_t q = 0; q < fr.size(); ++q) qx[q] = p.value(q, j) * n[q].x(), qy[q] = p.value(q, j) * n[q].y();
            CHECK(residual(qx, qy, fb.vx, fb.vy, fr) < 1e-9);
          }
        }
      }
    }
  }
}

TEST_CASE("spanning fields agree with finite differences") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {kCylinder});
  const EnrichmentConfig cfg{0.2, {kCylinder}};
  std::mt19937 gen(21);
  for (const auto& e : mesh.elements) {
    const auto rule = element_rule(mesh, e, 12);
    const LocalSpaces sp = build_local_spaces(e, 1, cfg, rule);
    const double h = 1e-5 * e.diameter;
    std::uniform_int_distribution<std::size_t> pick(0, rule.size() - 1);
    const Point2 x = rule.points[pick(gen)];
    auto check_vector = [&](const VectorField& f) {
      const VectorJet j = f.jet(x);
      Eigen::Matrix2d fd;
      Vector2 lap = Vector2::Zero();
      for (int c = 0; c < 2; ++c) {
        Vector2 d = Vector2::Zero();
        d[c] = h;
        fd.col(c) = (f.jet(x + d).value - f.jet(x - d).value) / (2 * h);
        lap += (f.jet(x + d).grad.col(c) - f.jet(x - d).grad.col(c)) / (2 * h);
      }
      CHECK((fd - j.grad).norm() <= 1e-6 * std::max(1.0, j.grad.norm()));
      CHECK((lap - j.lap).norm() <= 1e-6 * std::max(1.0, j.lap.norm() + j.grad.norm() / e.diameter));
    };
    for (const auto& f : sp.recon.spanning) check_vector(f);
    for (const auto& f : sp.cell.spanning) check_vector(f);
    for (const auto& f : sp.pressure.spanning) {
      const ScalarJet j = f.jet(x);
      Vector2 fd;
      double lap = 0.0;
      for (int c = 0; c < 2; ++c) {
        Vector2 d = Vector2::Zero();
        d[c] = h;
        fd[c] = (f.jet(x + d).value - f.jet(x - d).value) / (2 * h);
        lap += (f.jet(x + d).grad[c] - f.jet(x - d).grad[c]) / (2 * h);
      }
      CHECK((fd - j.grad).norm() <= 1e-6 * std::max(1.0, j.grad.norm()));
      CHECK(std::abs(lap - j.lap) <= 1e-6 * std::max(1.0, std::abs(j.lap) + j.grad.norm() / e.diameter));
    }
  }
}
