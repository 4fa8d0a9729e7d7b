#pragma once

// Global Stokes system: scatter of the local operators, Dirichlet data on
// every boundary face, zero-mean pressure via one Lagrange multiplier, and
// static condensation down to face velocities plus one pressure per element.

#include <vector>

#include "hho/local_ops.hpp"

namespace hho {

struct StokesProblem {
  const Mesh* mesh{nullptr};
  int k{0};
  EnrichmentConfig enrichment;
  double viscosity{1.0};
  VectorFunction force;
  VectorFunction dirichlet;
  /// Optional scalar used to choose quadrature degrees (see build_discretization).
  ScalarFunction data_probe;
};

/// Numbering of the global unknowns.
///
/// Condensed layout: internal face dofs, then one pressure per element, then
/// the multiplier. Full layout: internal face dofs, element velocity dofs,
/// all pressure dofs, then the multiplier.
struct GlobalDofMap {
  std::vector<int> face_offset;  // -1 on boundary faces
  std::vector<int> face_dim;
  std::vector<char> boundary;
  std::vector<int> cell_offset;
  std::vector<int> cell_dim;
  std::vector<int> pressure_offset;
  std::vector<int> pressure_dim;
  int num_face_dofs{0};
  int num_cell_dofs{0};
  int num_pressure_dofs{0};

  int num_elements() const { return static_cast<int>(cell_dim.size()); }
  /// Globally coupled unknowns after condensation, multiplier excluded.
  int condensed_dofs() const { return num_face_dofs + num_elements(); }
  int full_size() const { return num_face_dofs + num_cell_dofs + num_pressure_dofs + 1; }
};

/// card(T_h) + sum of dim V_F over internal faces, computed from the discretization alone.
int count_dofs(const Discretization& disc);

struct Assembly {
  const Discretization* disc{nullptr};
  double viscosity{1.0};
  GlobalDofMap map;
  std::vector<LocalOperators> ops;
  /// Load against the element velocity basis.
  std::vector<Eigen::VectorXd> load;
  /// Projected Dirichlet data, empty on internal faces.
  std::vector<Eigen::VectorXd> boundary_values;
};

Assembly assemble(const StokesProblem& problem, const Discretization& disc);

struct DiscreteSolution {
  std::vector<Eigen::VectorXd> face;
  std::vector<Eigen::VectorXd> cell;
  std::vector<Eigen::VectorXd> pressure;
  /// Reconstructed velocity, coefficients in V_recon.
  std::vector<Eigen::VectorXd> recon;
  double multiplier{0.0};

  /// Local unknown vector (v_T, v_F...) of an element.
  Eigen::VectorXd local(const Element& element) const;
};

/// Solve through the condensed system.
DiscreteSolution condense_and_solve(const Assembly& assembly);

/// Solve the full saddle-point system without condensation.
DiscreteSolution solve_full(const Assembly& assembly);

/// Fill `recon` from the element operators.
void reconstruct_fields(const Assembly& assembly, DiscreteSolution& solution);

struct SolutionResiduals {
  /// max over pressure basis functions q of |b_h(u_h, q)|.
  double divergence{0.0};
  /// |integral of p_h|.
  double pressure_mean{0.0};
  /// Coefficient (discrete L2) norms.
  double velocity_norm{0.0};
  double pressure_norm{0.0};
};

SolutionResiduals residuals(const Assembly& assembly, const DiscreteSolution& solution);

}  // namespace hho
