#include "doctest.h"

#include <sstream>

#include "hho/experiments.hpp"

using namespace hho;

namespace {

std::string table_text(const ErrorReport& r) {
  std::ostringstream os;
  emit_table(r, os);
  return os.str();
}

std::vector<std::string> lines_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream is(s);
  for (std::string line; std::getline(is, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("config parsing") {
  ExperimentConfig c;
  std::istringstream is(
      "# Test B run\n"
      "test = B\n"
      "k = 1   # degree\n"
      "gamma = 0.1\n"
      "meshes = 7, 14,21\n"
      "reference = 35\n"
      "out = results\n"
      "dump_fields = true\n");
  read_config(is, c);
  CHECK(c.test == TestCase::B);
  CHECK(c.k == 1);
  CHECK(c.gamma == 0.1);
  CHECK(c.meshes == std::vector<int>{7, 14, 21});
  CHECK(c.reference_mesh == 35);
  CHECK(c.out == "results");
  CHECK(c.dump_fields);
  CHECK_FALSE(c.dump_mesh);

  for (const char* bad : {"colour = red\n", "k = 1.5\n", "k = -1\n", "gamma = abc\n", "meshes = 4,x\n", "meshes = 0\n",
                          "test = C\n", "dump_fields = maybe\n", "just a line\n"}) {
    ExperimentConfig d;
    std::istringstream bs(bad);
    CHECK_THROWS_AS(read_config(bs, d), Error);
  }
}

TEST_CASE("default mesh sequences") {
  CHECK(default_meshes(TestCase::A) == std::vector<int>{4, 8, 16, 32});
  for (int n : default_meshes(TestCase::B)) CHECK(n % 8 != 0);
  ExperimentConfig c;
  CHECK(table_name(c) == "testA_k0_gamma0_R0.1.dat");
  c.test = TestCase::B;
  c.k = 1;
  c.gamma = 0.2;
  CHECK(table_name(c) == "testB_k1_gamma0.2.dat");
}

TEST_CASE("Test A table layout and determinism") {
  ExperimentConfig c;
  c.k = 1;
  c.gamma = 0.2;
  c.meshes = {4, 8, 16};
  const ErrorReport a = run(c);
  const std::string text = table_text(a);
  const auto lines = lines_of(text);
  REQUIRE(lines.size() == 4);
  CHECK(lines[0] == "MeshTitle MeshSize NbCells NbInternalEdges DOFs L2Error EnergyError PressureError");
  CHECK(lines[1].rfind("Mesh1 0.35355339059327379 16 24 ", 0) == 0);
  CHECK(table_text(run(c)) == text);

  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const MeshRow& r = a.rows[i];
    CHECK(r.residuals.divergence < 1e-10 * r.residuals.velocity_norm);
    CHECK(r.residuals.pressure_mean < 1e-10 * r.residuals.pressure_norm);
    for (double e : r.errors) CHECK(e >= 0.0);
    if (i > 0) {
      CHECK(r.dofs > a.rows[i - 1].dofs);
      for (int j = 0; j < 3; ++j) CHECK(r.errors[j] < a.rows[i - 1].errors[j]);
    }
  }
}

TEST_CASE("relative errors are invariant under data scaling") {
  ExperimentConfig c;
  c.gamma = 0.2;
  c.meshes = {4, 8};
  const ErrorReport a = run(c);
  c.scale = 10.0;
  const ErrorReport b = run(c);
  for (std::size_t i = 0; i < a.rows.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(a.rows[i].errors[j] - b.rows[i].errors[j]) < 1e-9);
}

TEST_CASE("enriched scheme is exact for the cylinder solution") {
  ExperimentConfig c;
  c.gamma = 10.0;
  c.meshes = {4, 8};
  c.solution = TestASolution::cylinder;
  for (const MeshRow& r : run(c).rows)
    for (double e : r.errors) CHECK(e < 1e-8);
}

TEST_CASE("Test B no-slip, reference row and table") {
  ExperimentConfig c;
  c.test = TestCase::B;
  c.k = 1;
  c.gamma = 0.2;
  c.meshes = {7, 14};
  c.reference_mesh = 14;
  const ErrorReport r = run(c);
  REQUIRE(r.rows.size() == 1);
  CHECK(r.rows[0].n == 7);
  const auto lines = lines_of(table_text(r));
  CHECK(lines[0] == "MeshTitle MeshSize NbCells NbInternalEdges DOFs H1Error PressureError");
  CHECK(r.rows[0].errors[0] == doctest::Approx(std::abs(r.rows[0].h1_seminorm - r.reference_h1_seminorm)));
  CHECK(r.reference_pressure_norm > 0.0);

  const auto sc = solve_case(c, 7);
  int cylinder_faces = 0;
  for (const Face& f : sc->mesh.faces) {
    if (f.kind == BoundaryKind::cylinder_boundary) {
      ++cylinder_faces;
      CHECK(sc->solution.face[f.id].norm() == 0.0);
    } else if (f.kind == BoundaryKind::square_boundary) {
      CHECK(sc->solution.face[f.id].norm() > 0.0);
    }
  }
  CHECK(cylinder_faces >= 4 * 2);
}

TEST_CASE("field dump") {
  ExperimentConfig c;
  c.k = 1;
  c.gamma = 10.0;
  c.radius = 0.2;
  c.solution = TestASolution::cylinder;
  const auto sc = solve_case(c, 5);
  std::ostringstream os;
  dump_fields(*sc, os, 50);
  const auto lines = lines_of(os.str());
  REQUIRE(lines.size() == 2501);
  CHECK(lines[0] == "# x y u_x u_y p mask");
  const CylinderSolution exact{Circle{{0.5, 0.5}, 0.2}};
  int masked = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    std::istringstream ls(lines[i]);
    double x, y, ux, uy, p;
    int mask;
    ls >> x >> y >> ux >> uy >> p >> mask;
    const bool inside = std::hypot(x - 0.5, y - 0.5) < 0.2;
    CHECK(mask == (inside ? 0 : 1));
    if (inside) {
      ++masked;
      CHECK(ux == 0.0);
    } else {
      // The discrete solution is exact up to output precision.
      CHECK(std::abs(ux - exact.velocity({x, y}).value.x()) < 1e-8);
      CHECK(std::abs(uy - exact.velocity({x, y}).value.y()) < 1e-8);
    }
  }
  CHECK(masked == doctest::Approx(2500 * pi * 0.04).epsilon(0.05));
}

TEST_CASE("errors name the failing mesh") {
  ExperimentConfig c;
  c.meshes = {4};
  c.radius = 0.7;
  try {
    run(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("mesh n=4") != std::string::npos);
  }
}
