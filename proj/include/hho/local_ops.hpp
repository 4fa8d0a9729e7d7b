#pragma once

// Element-level HHO operators acting on local unknowns
//   (v_T, v_F1, ..., v_Fm) in V_T x V_F1 x ... x V_Fm,
// all expressed in the orthonormal bases built by `spaces`.

#include <functional>
#include <vector>

#include "hho/spaces.hpp"

namespace hho {

using VectorFunction = std::function<Vector2(const Point2&)>;
using VectorJetFunction = std::function<VectorJet(const Point2&)>;
using ScalarFunction = std::function<double(const Point2&)>;

/// Quadrature rules and spaces for every element and face of a mesh.
///
/// Rule degrees start at 2(k+2), plus 4 where enrichment is active, and are
/// raised by adaptive_integrate on a probe built from the active enrichment
/// functions and the optional data probe.
struct Discretization {
  const Mesh* mesh{nullptr};
  int k{0};
  EnrichmentConfig enrichment;
  std::vector<QuadratureRule> element_rules;
  std::vector<QuadratureRule> face_rules;
  std::vector<LocalSpaces> element_spaces;
  std::vector<FaceSpace> face_spaces;
};

Discretization build_discretization(const Mesh& mesh, int k, const EnrichmentConfig& enrichment,
                                    const ScalarFunction& data_probe = {});

struct LocalLayout {
  int cell_dim{0};
  std::vector<int> face_dims;
  std::vector<int> face_offsets;
  int total{0};
  int pressure_dim{0};
};

/// Basis tables of one element and its faces at the discretization's nodes.
struct LocalContext {
  const Discretization* disc{nullptr};
  const Element* element{nullptr};
  LocalLayout layout;
  VectorTable recon, cell;
  ScalarTable pressure;
  std::vector<std::vector<Vector2>> face_normals;  // outward, per face node
  std::vector<VectorTable> face_recon;
  std::vector<FaceTable> face_basis;
  std::vector<ScalarTable> face_pressure;

  const QuadratureRule& rule() const { return disc->element_rules[element->id]; }
  const QuadratureRule& face_rule(int local) const { return disc->face_rules[element->faces[local].face]; }
  const LocalSpaces& spaces() const { return disc->element_spaces[element->id]; }
};

LocalContext make_context(const Discretization& disc, int element);

struct LocalOperators {
  LocalLayout layout;
  /// Stiffness Gram of V_recon.
  Eigen::MatrixXd G;
  /// Reconstruction, dim V_recon x N_T.
  Eigen::MatrixXd R;
  /// Divergence reconstruction, dim Q_T x N_T.
  Eigen::MatrixXd D;
  Eigen::MatrixXd S;
  Eigen::MatrixXd A;
  /// b_T(v, q) = q^T B v with B = -D.
  Eigen::MatrixXd B;
};

LocalOperators local_operators(const LocalContext& ctx);

/// Extended elliptic projection onto V_recon (coefficients).
Eigen::VectorXd elliptic_project(const LocalContext& ctx, const VectorJetFunction& v);

/// L2 projections onto V_T and each V_F, stacked in the local layout.
Eigen::VectorXd interpolate(const LocalContext& ctx, const VectorFunction& v);

/// L2 projections onto V_recon, V_T and Q_T.
Eigen::VectorXd project_recon(const LocalContext& ctx, const VectorFunction& v);
Eigen::VectorXd project_cell(const LocalContext& ctx, const VectorFunction& v);
Eigen::VectorXd project_pressure(const LocalContext& ctx, const ScalarFunction& q);

/// L2 projection of v onto a face space using that face's rule.
Eigen::VectorXd project_face(const Discretization& disc, int face, const VectorFunction& v);

}  // namespace hho
