#pragma once

// Test A (single cylinder, manufactured solution) and Test B (four cylinders
// in a uniform stream), error metrics, data tables and field dumps.

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hho/assembly.hpp"

namespace hho {

enum class TestCase { A, B };

/// Exact solution used by Test A.
enum class TestASolution {
  /// Cylinder pair plus smooth part, with body force.
  manufactured,
  /// Cylinder pair alone, zero body force.
  cylinder,
};

struct ExperimentConfig {
  TestCase test{TestCase::A};
  int k{0};
  double gamma{0.0};
  /// Cylinder radius of Test A, centred at (1/2, 1/2).
  double radius{0.1};
  /// Empty selects default_meshes(test).
  std::vector<int> meshes;
  /// Test B reference resolution (run with k = 1, gamma = 0.2).
  int reference_mesh{42};
  TestASolution solution{TestASolution::manufactured};
  /// Multiplies the data of Test A (the relative errors must not change).
  double scale{1.0};
  std::filesystem::path out{"."};
  bool dump_fields{false};
  bool dump_mesh{false};
};

/// Default mesh sequence for each test.
std::vector<int> default_meshes(TestCase test);

/// Flat `key = value` format with `#` comments. Keys: test, k, gamma, radius,
/// meshes, reference, solution, scale, out, dump_fields, dump_mesh. Values
/// override those already in `config`.
void read_config(std::istream& is, ExperimentConfig& config);
void read_config_file(const std::filesystem::path& path, ExperimentConfig& config);

/// The four cylinders of Test B.
std::vector<Circle> test_b_cylinders();

struct MeshRow {
  int n{0};
  double h{0.0};
  int cells{0};
  int internal_faces{0};
  int dofs{0};
  /// In the order of ErrorReport::columns.
  std::vector<double> errors;
  SolutionResiduals residuals;
  /// Extra quantities: Test B stores the pressure norm and H1 seminorm.
  double pressure_norm{0.0};
  double h1_seminorm{0.0};
};

struct ErrorReport {
  TestCase test{TestCase::A};
  std::vector<std::string> columns;
  std::vector<MeshRow> rows;
  /// Test B reference values.
  double reference_pressure_norm{0.0};
  double reference_h1_seminorm{0.0};
};

/// Relative errors E0, Ea, Ep of a solved Test A problem.
struct TestAErrors {
  double l2{0.0}, energy{0.0}, pressure{0.0};
};

TestAErrors test_a_errors(const Assembly& assembly, const DiscreteSolution& solution, const VectorFunction& u,
                          const ScalarFunction& p);

/// Pressure L2 norm and broken H1 seminorm of the reconstructed velocity.
double pressure_norm(const DiscreteSolution& solution);
double h1_seminorm(const Assembly& assembly, const DiscreteSolution& solution);

/// A solved configuration kept alive for inspection.
struct SolvedCase {
  Mesh mesh;
  Discretization disc;
  Assembly assembly;
  DiscreteSolution solution;
};

/// Mesh, discretize, assemble and solve one Test A or Test B configuration.
/// The returned object owns the mesh that the other members point to.
std::unique_ptr<SolvedCase> solve_case(const ExperimentConfig& config, int n);

ErrorReport run_test_a(const ExperimentConfig& config);
ErrorReport run_test_b(const ExperimentConfig& config);
ErrorReport run(const ExperimentConfig& config);

/// Whitespace-separated table with a header line and 17 significant digits.
void emit_table(const ErrorReport& report, std::ostream& os);
void emit_table(const ErrorReport& report, const std::filesystem::path& path);

/// Output file name of a run, e.g. `testA_k0_gamma0.2.dat`.
std::string table_name(const ExperimentConfig& config);

/// Samples velocity and pressure on a uniform 200 x 200 grid of cell centres
/// of the unit square. A `#` header line is followed by rows `x y u_x u_y p mask`.
/// The mask is 0 outside the fluid, where the values are written as 0.
void dump_fields(const SolvedCase& solved, std::ostream& os, int resolution = 200);

}  // namespace hho
