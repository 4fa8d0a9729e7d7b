#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "hho/mesh.hpp"
#include "hho/quadrature.hpp"

using namespace hho;

TEST_CASE("uniform grid combinatorics") {
  const Mesh mesh = build_cartesian_cut_mesh(4, {});
  CHECK(mesh.elements.size() == 16);
  CHECK(mesh.num_internal_faces() == 24);
  // h is the largest element diameter; for squares of side 1/4 that is the diagonal.
  CHECK(mesh.h == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
  for (const auto& e : mesh.elements) {
    CHECK(e.cell.width() == doctest::Approx(0.25));
    CHECK(e.area == doctest::Approx(1.0 / 16.0).epsilon(1e-14));
    CHECK_FALSE(e.is_cut());
  }
}

TEST_CASE("total area with one cylinder") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {{{0.5, 0.5}, 0.1}});
  double total = 0.0;
  for (const auto& e : mesh.elements) total += element_rule(mesh, e, 4).measure();
  CHECK(std::abs(total - (1.0 - 0.01 * pi)) < 1e-10 * total);
  const auto diag = validate_mesh(mesh);
  CHECK(std::abs(diag.total_area - (1.0 - 0.01 * pi)) < 1e-12);
  for (double f : diag.area_fraction) {
    CHECK(f > 0.0);
    CHECK(f <= 1.0 + 1e-14);
  }
  CHECK(diag.loops_closed);
  CHECK(diag.orientation_consistent);
  CHECK(diag.adjacency_consistent);
}

TEST_CASE("small cylinder only modifies the four cells around it") {
  const Circle c{{0.5, 0.5}, 0.01};
  const Mesh mesh = build_cartesian_cut_mesh(8, {c});
  REQUIRE(mesh.elements.size() == 64);
  // Brute-force: a cell is affected iff the closed disc meets it.
  int arcs_total = 0;
  for (const auto& e : mesh.elements) {
    const bool touches = distance_to_box(c.center, e.cell) < c.radius;
    int arcs = 0;
    for (const auto& ref : e.faces) arcs += mesh.faces[ref.face].is_arc() ? 1 : 0;
    arcs_total += arcs;
    CHECK(e.is_cut() == touches);
    CHECK(arcs == (touches ? 1 : 0));
    if (!touches) CHECK(e.faces.size() == 4);
  }
  CHECK(arcs_total == 4);
}

TEST_CASE("face ownership and normals") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {{{0.5, 0.5}, 0.1}});
  std::size_t owner_slots = 0, loop_slots = 0;
  for (const auto& f : mesh.faces) owner_slots += (f.elements[0] >= 0) + (f.elements[1] >= 0);
  for (const auto& e : mesh.elements) loop_slots += e.faces.size();
  CHECK(owner_slots == loop_slots);

  for (const auto& f : mesh.faces) {
    if (f.is_boundary()) {
      CHECK(f.elements[1] < 0);
      continue;
    }
    const auto& e0 = mesh.elements[f.elements[0]];
    const auto& e1 = mesh.elements[f.elements[1]];
    FaceRef r0, r1;
    for (const auto& r : e0.faces) if (r.face == f.id) r0 = r;
    for (const auto& r : e1.faces) if (r.face == f.id) r1 = r;
    for (const auto& x : face_rule(f, 3).points) {
      const Vector2 n0 = mesh.outward_normal(r0, x), n1 = mesh.outward_normal(r1, x);
      CHECK((n0 + n1).norm() == 0.0);
    }
  }
}

TEST_CASE("arc normal points into the cylinder") {
  const Circle c{{0.5, 0.5}, 0.1};
  const Mesh mesh = build_cartesian_cut_mesh(8, {c});
  int arcs = 0;
  for (const auto& e : mesh.elements) {
    for (const auto& ref : e.faces) {
      const Face& f = mesh.faces[ref.face];
      if (!f.is_arc()) continue;
      ++arcs;
      CHECK(f.kind == BoundaryKind::cylinder_boundary);
      CHECK(f.arc().theta1 - f.arc().theta0 < pi);
      for (const auto& x : face_rule(f, 4).points) {
        const Vector2 expected = (c.center - x) / c.radius;
        CHECK((mesh.outward_normal(ref, x) - expected).norm() < 1e-14);
      }
    }
  }
  CHECK(arcs > 0);
}

TEST_CASE("congruent elements share chunkiness") {
  const auto diag = validate_mesh(build_cartesian_cut_mesh(4, {}));
  CHECK(diag.min_chunkiness == doctest::Approx(diag.max_chunkiness).epsilon(1e-14));
  CHECK(diag.min_chunkiness > 0.0);
}

TEST_CASE("corrupted orientation is detected") {
  Mesh mesh = build_cartesian_cut_mesh(4, {});
  for (auto& ref : mesh.elements[5].faces) {
    if (!mesh.faces[ref.face].is_boundary()) {
      ref.orientation = -ref.orientation;
      break;
    }
  }
  CHECK_THROWS_WITH_AS(validate_mesh(mesh), "inconsistent orientation", MeshError);
}

TEST_CASE("dangling face is detected") {
  Mesh mesh = build_cartesian_cut_mesh(4, {});
  mesh.elements[0].faces.pop_back();
  CHECK_THROWS_AS(validate_mesh(mesh), MeshError);
}

TEST_CASE("invalid configurations are rejected") {
  CHECK_THROWS_AS(build_cartesian_cut_mesh(1, {}), MeshError);
  // Touching the square boundary.
  CHECK_THROWS_AS(build_cartesian_cut_mesh(4, {{{0.1, 0.5}, 0.1}}), MeshError);
  // Tangent to the grid line y = 0.5.
  CHECK_THROWS_AS(build_cartesian_cut_mesh(4, {{{0.6, 0.6}, 0.1}}), MeshError);
  // Through the grid vertex (0.5, 0.5).
  CHECK_THROWS_AS(build_cartesian_cut_mesh(4, {{{0.6, 0.5}, 0.1}}), MeshError);
  // Overlapping cylinders.
  CHECK_THROWS_AS(build_cartesian_cut_mesh(4, {{{0.4, 0.4}, 0.1}, {{0.45, 0.4}, 0.1}}), MeshError);
}

TEST_CASE("cylinder strictly inside one cell") {
  const Mesh mesh = build_cartesian_cut_mesh(4, {{{0.6, 0.6}, 0.02}});
  const auto diag = validate_mesh(mesh);
  CHECK(std::abs(diag.total_area - (1.0 - pi * 0.0004)) < 1e-12);
  CHECK(mesh.elements.size() == 17);
}

TEST_CASE("point location") {
  const Mesh mesh = build_cartesian_cut_mesh(8, {{{0.5, 0.5}, 0.1}});
  CHECK_FALSE(mesh.locate({0.5, 0.5}).has_value());
  CHECK_FALSE(mesh.locate({0.55, 0.52}).has_value());
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Point2 p(u(gen), u(gen));
    const bool fluid = (p - Point2(0.5, 0.5)).norm() > 0.1;
    CHECK(mesh.locate(p).has_value() == fluid);
  }
}

TEST_CASE("mesh dump header") {
  std::ostringstream os;
  write_mesh(build_cartesian_cut_mesh(4, {{{0.5, 0.5}, 0.1}}), os);
  CHECK(os.str().rfind("hho-mesh v1\n", 0) == 0);
}
