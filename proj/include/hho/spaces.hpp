#pragma once

// Local function spaces on elements and faces.
//
// A space is a list of spanning fields plus a coefficient matrix mapping them
// to an L2-orthonormal basis. Dependent spanning functions are dropped during
// orthonormalisation, which is how the enrichment overlaps (lap u = grad p
// for the cylinder pair, identical face traces from both owners) disappear.

#include <functional>
#include <string>
#include <vector>

#include "hho/analytic.hpp"
#include "hho/mesh.hpp"
#include "hho/quadrature.hpp"

namespace hho {

struct ScalarField {
  std::function<ScalarJet(const Point2&)> jet;
  std::string label;
};

struct VectorField {
  std::function<VectorJet(const Point2&)> jet;
  std::string label;
};

/// Face fields see the point, the face's stored normal and the face-local
/// coordinate in [-1, 1].
struct FacePoint {
  Point2 x;
  Vector2 normal;
  double param{0.0};
};

struct FaceField {
  std::function<Vector2(const FacePoint&)> value;
  std::string label;
};

template <class Field>
struct FunctionSpace {
  std::vector<Field> spanning;
  /// basis_j = sum_i coefficients(i, j) spanning_i.
  Eigen::MatrixXd coefficients;
  std::vector<int> kept;
  std::vector<int> pruned;
  /// 2-norm condition number of the Gram matrix of the kept spanning functions.
  double gram_condition{1.0};

  int dim() const { return static_cast<int>(coefficients.cols()); }
};

using ScalarSpace = FunctionSpace<ScalarField>;
using VectorSpace = FunctionSpace<VectorField>;
using FaceSpace = FunctionSpace<FaceField>;

inline constexpr double kPruneTolerance = 1e-10;

struct Orthonormalization {
  Eigen::MatrixXd coefficients;
  std::vector<int> kept;
  std::vector<int> pruned;
  double gram_condition{1.0};
};

/// Modified Gram-Schmidt with reorthogonalisation on the columns of
/// `weighted_values` (one column per spanning function, rows are quadrature
/// samples scaled by sqrt(weight)). A column is kept when its residual after
/// projection onto the kept set exceeds `tolerance` times its own norm.
/// Throws Error when nothing is kept.
Orthonormalization orthonormalize(const Eigen::MatrixXd& weighted_values, double tolerance = kPruneTolerance);

ScalarSpace prune_dependent(std::vector<ScalarField> spanning, const QuadratureRule& rule,
                            double tolerance = kPruneTolerance);
VectorSpace prune_dependent(std::vector<VectorField> spanning, const QuadratureRule& rule,
                            double tolerance = kPruneTolerance);
FaceSpace prune_dependent(std::vector<FaceField> spanning, const QuadratureRule& rule,
                          double tolerance = kPruneTolerance);

/// Monomials ((x - x_T)/s)^a ((y - y_T)/s)^b, s = h_T/2, of total degree <= degree.
std::vector<ScalarField> scalar_monomials(const Element& element, int degree);
/// Each scalar monomial times e_x and e_y.
std::vector<VectorField> vector_monomials(const Element& element, int degree);

/// Orthonormal P^degree(T) and P^degree(T)^2.
ScalarSpace element_poly_basis_scalar(const Element& element, int degree, const QuadratureRule& rule);
VectorSpace element_poly_basis_vector(const Element& element, int degree, const QuadratureRule& rule);

/// Polynomial part of the face space: P^0 + (P^k)^{2x2} n_F restricted to F.
///
/// On segments this is P^k(F)^2 (Legendre in the face coordinate). On an arc
/// the restriction is the space of vector trigonometric polynomials of degree
/// k+1 in the angle; it is spanned by (1+t^2)^{-(k+1)} L_m(t/t_max) e_i,
/// m <= 2k+2, with t = tan((theta - theta_mid)/2), a well-conditioned
/// rational form of the same space.
std::vector<FaceField> face_poly_spanning(const Face& face, int k);
FaceSpace curved_face_basis(const Face& face, int k, const QuadratureRule& rule);

struct EnrichmentConfig {
  double gamma{0.0};
  std::vector<Circle> cylinders;
  double U{1.0};
};

/// Cylinders whose surface lies within gamma of the element centroid
/// (|x_T - c| - R <= gamma). Empty when gamma == 0.
std::vector<int> active_cylinders(const Element& element, const EnrichmentConfig& config);

struct EnrichmentSets {
  std::vector<VectorField> psi;
  std::vector<ScalarField> phi;
};
EnrichmentSets enrichment_sets(const Element& element, const EnrichmentConfig& config);

struct LocalSpaces {
  /// P^{k+1}(T)^2 + Psi(T).
  VectorSpace recon;
  /// P^k(T)^2 + lap Psi(T) + grad Phi(T).
  VectorSpace cell;
  /// P^k(T) + Phi(T); basis 0 is the constant 1/sqrt|T|, the rest have zero mean.
  ScalarSpace pressure;
  std::vector<int> cylinders;
};

LocalSpaces build_local_spaces(const Element& element, int k, const EnrichmentConfig& config,
                               const QuadratureRule& rule);

/// Face space P^k(F) + sum over owners T and their active cylinders of
/// {(grad u_hat) n_TF, p_hat n_TF}.
FaceSpace build_face_space(const Mesh& mesh, const Face& face, int k, const EnrichmentConfig& config,
                           const QuadratureRule& rule);

/// Basis values at quadrature nodes; every matrix is (points x dim).
struct ScalarTable {
  Eigen::MatrixXd value, dx, dy;
};
struct VectorTable {
  Eigen::MatrixXd vx, vy;
  Eigen::MatrixXd gxx, gxy, gyx, gyy;  // g_ij = d v_i / d x_j
  Eigen::MatrixXd lx, ly;
};
struct FaceTable {
  Eigen::MatrixXd vx, vy;
};

ScalarTable tabulate(const ScalarSpace& space, const std::vector<Point2>& points);
VectorTable tabulate(const VectorSpace& space, const std::vector<Point2>& points);
FaceTable tabulate(const FaceSpace& space, const QuadratureRule& face_rule);

/// Basis values at a single point.
Eigen::VectorXd evaluate(const ScalarSpace& space, const Point2& x);
Eigen::Matrix2Xd evaluate(const VectorSpace& space, const Point2& x);

}  // namespace hho
