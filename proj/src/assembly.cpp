#include "hho/assembly.hpp"

#include <Eigen/SparseLU>

#include "hho/parallel.hpp"

namespace hho {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

GlobalDofMap build_dof_map(const Discretization& disc) {
  const Mesh& mesh = *disc.mesh;
  GlobalDofMap map;
  const std::size_t nf = mesh.faces.size(), ne = mesh.elements.size();
  map.face_offset.assign(nf, -1);
  map.face_dim.resize(nf);
  map.boundary.resize(nf);
  for (std::size_t f = 0; f < nf; ++f) {
    map.face_dim[f] = disc.face_spaces[f].dim();
    map.boundary[f] = mesh.faces[f].is_boundary();
    if (!map.boundary[f]) {
      map.face_offset[f] = map.num_face_dofs;
      map.num_face_dofs += map.face_dim[f];
    }
  }
  map.cell_offset.resize(ne);
  map.cell_dim.resize(ne);
  map.pressure_offset.resize(ne);
  map.pressure_dim.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    map.cell_dim[e] = disc.element_spaces[e].cell.dim();
    map.pressure_dim[e] = disc.element_spaces[e].pressure.dim();
    map.cell_offset[e] = map.num_face_dofs + map.num_cell_dofs;
    map.num_cell_dofs += map.cell_dim[e];
  }
  for (std::size_t e = 0; e < ne; ++e) {
    map.pressure_offset[e] = map.num_face_dofs + map.num_cell_dofs + map.num_pressure_dofs;
    map.num_pressure_dofs += map.pressure_dim[e];
  }
  return map;
}

// Integrals of the pressure basis functions.
Eigen::VectorXd pressure_means(const Discretization& disc, int element) {
  const QuadratureRule& rule = disc.element_rules[element];
  const ScalarTable t = tabulate(disc.element_spaces[element].pressure, rule.points);
  return t.value.transpose() * Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), rule.weights.size());
}

// Local saddle-point matrix over (u_T, u_F..., p, lambda).
Eigen::MatrixXd local_system(const Assembly& as, int element) {
  const LocalOperators& ops = as.ops[element];
  const int nu = ops.layout.total, np = ops.layout.pressure_dim;
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(nu + np + 1, nu + np + 1);
  M.topLeftCorner(nu, nu) = as.viscosity * ops.A;
  M.block(nu, 0, np, nu) = ops.B;
  M.block(0, nu, nu, np) = ops.B.transpose();
  const Eigen::VectorXd c = pressure_means(*as.disc, element);
  M.block(nu, nu + np, np, 1) = c;
  M.block(nu + np, nu, 1, np) = c.transpose();
  return M;
}

// Index sets for condensation: interior (u_T, p_1..) and skeleton (faces, p_0, lambda).
struct Partition {
  std::vector<int> interior, skeleton;
};

Partition partition(const LocalLayout& layout) {
  Partition p;
  const int nu = layout.total, np = layout.pressure_dim;
  for (int i = 0; i < layout.cell_dim; ++i) p.interior.push_back(i);
  for (int i = 1; i < np; ++i) p.interior.push_back(nu + i);
  for (int i = layout.cell_dim; i < nu; ++i) p.skeleton.push_back(i);
  p.skeleton.push_back(nu);
  p.skeleton.push_back(nu + np);
  return p;
}

Eigen::MatrixXd sub(const Eigen::MatrixXd& M, const std::vector<int>& rows, const std::vector<int>& cols) {
  return M(rows, cols);
}

// Global index of a local skeleton unknown in the condensed layout, or -1 with
// the imposed value returned in `value` for boundary face dofs.
struct SkeletonMap {
  std::vector<int> index;
  Eigen::VectorXd value;
};

SkeletonMap skeleton_map(const Assembly& as, const Element& element) {
  const GlobalDofMap& map = as.map;
  SkeletonMap s;
  std::vector<double> values;
  for (const FaceRef& ref : element.faces) {
    for (int i = 0; i < map.face_dim[ref.face]; ++i) {
      if (map.boundary[ref.face]) {
        s.index.push_back(-1);
        values.push_back(as.boundary_values[ref.face][i]);
      } else {
        s.index.push_back(map.face_offset[ref.face] + i);
        values.push_back(0.0);
      }
    }
  }
  s.index.push_back(map.num_face_dofs + element.id);
  s.index.push_back(map.num_face_dofs + map.num_elements());
  values.push_back(0.0);
  values.push_back(0.0);
  s.value = Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
  return s;
}

// Scatter a local block into triplets; boundary columns go to the right-hand side.
void scatter(const Eigen::MatrixXd& K, const Eigen::VectorXd& rhs, const std::vector<int>& index,
             const Eigen::VectorXd& known, Triplets& triplets, Eigen::VectorXd& global_rhs) {
  for (Eigen::Index r = 0; r < K.rows(); ++r) {
    if (index[r] < 0) continue;
    double b = rhs[r];
    for (Eigen::Index c = 0; c < K.cols(); ++c) {
      if (index[c] < 0) {
        b -= K(r, c) * known[c];
      } else if (K(r, c) != 0.0) {
        triplets.emplace_back(index[r], index[c], K(r, c));
      }
    }
    global_rhs[index[r]] += b;
  }
}

Eigen::VectorXd sparse_solve(int n, const Triplets& triplets, const Eigen::VectorXd& rhs) {
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw SolverError("singular global system: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(rhs);
  if (lu.info() != Eigen::Success || !x.allFinite()) throw SolverError("global solve failed");
  return x;
}

DiscreteSolution empty_solution(const Assembly& as) {
  DiscreteSolution s;
  const GlobalDofMap& map = as.map;
  s.face.resize(map.face_dim.size());
  for (std::size_t f = 0; f < s.face.size(); ++f)
    s.face[f] = map.boundary[f] ? as.boundary_values[f] : Eigen::VectorXd::Zero(map.face_dim[f]);
  s.cell.resize(map.cell_dim.size());
  s.pressure.resize(map.cell_dim.size());
  return s;
}

}  // namespace

int count_dofs(const Discretization& disc) {
  int dofs = static_cast<int>(disc.mesh->elements.size());
  for (const Face& face : disc.mesh->faces)
    if (!face.is_boundary()) dofs += disc.face_spaces[face.id].dim();
  return dofs;
}

Assembly assemble(const StokesProblem& problem, const Discretization& disc) {
  if (!(problem.viscosity > 0.0)) throw Error("viscosity must be positive");
  const Mesh& mesh = *disc.mesh;
  Assembly as;
  as.disc = &disc;
  as.viscosity = problem.viscosity;
  as.map = build_dof_map(disc);
  const int ne = static_cast<int>(mesh.elements.size());
  as.ops.resize(ne);
  as.load.resize(ne);
  parallel_for(ne, [&](int e) {
    const LocalContext ctx = make_context(disc, e);
    as.ops[e] = local_operators(ctx);
    Eigen::VectorXd load = Eigen::VectorXd::Zero(ctx.layout.cell_dim);
    if (problem.force) {
      const QuadratureRule& rule = ctx.rule();
      Eigen::VectorXd fx(rule.size()), fy(rule.size());
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const Vector2 f = problem.force(rule.points[q]);
        fx[q] = rule.weights[q] * f.x();
        fy[q] = rule.weights[q] * f.y();
      }
      load = ctx.cell.vx.transpose() * fx + ctx.cell.vy.transpose() * fy;
    }
    as.load[e] = load;
  });
  const int nf = static_cast<int>(mesh.faces.size());
  as.boundary_values.resize(nf);
  parallel_for(nf, [&](int f) {
    if (!as.map.boundary[f]) return;
    as.boundary_values[f] = problem.dirichlet ? project_face(disc, f, problem.dirichlet)
                                              : Eigen::VectorXd::Zero(as.map.face_dim[f]);
  });
  return as;
}

Eigen::VectorXd DiscreteSolution::local(const Element& element) const {
  int n = static_cast<int>(cell[element.id].size());
  for (const FaceRef& ref : element.faces) n += static_cast<int>(face[ref.face].size());
  Eigen::VectorXd v(n);
  int at = 0;
  v.segment(at, cell[element.id].size()) = cell[element.id];
  at += static_cast<int>(cell[element.id].size());
  for (const FaceRef& ref : element.faces) {
    v.segment(at, face[ref.face].size()) = face[ref.face];
    at += static_cast<int>(face[ref.face].size());
  }
  return v;
}

DiscreteSolution condense_and_solve(const Assembly& as) {
  const Mesh& mesh = *as.disc->mesh;
  const GlobalDofMap& map = as.map;
  const int ne = map.num_elements();
  const int n = map.condensed_dofs() + 1;

  struct Condensed {
    Partition part;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu;
    Eigen::MatrixXd M_IK;
    Eigen::VectorXd F_I;
    Eigen::MatrixXd K;
    Eigen::VectorXd g;
  };
  std::vector<Condensed> local(ne);
  parallel_for(ne, [&](int e) {
    Condensed& c = local[e];
    const Eigen::MatrixXd M = local_system(as, e);
    c.part = partition(as.ops[e].layout);
    const Eigen::MatrixXd M_II = sub(M, c.part.interior, c.part.interior);
    c.M_IK = sub(M, c.part.interior, c.part.skeleton);
    c.F_I = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(c.part.interior.size()));
    c.F_I.head(as.load[e].size()) = as.load[e];
    c.lu.compute(M_II);
    const double rcond = c.lu.rcond();
    if (!(rcond > 1e-14)) throw SolverError("singular element block on element " + std::to_string(e));
    const Eigen::MatrixXd X = c.lu.solve(c.M_IK);
    const Eigen::VectorXd y = c.lu.solve(c.F_I);
    c.K = sub(M, c.part.skeleton, c.part.skeleton) - c.M_IK.transpose() * X;
    c.g = -c.M_IK.transpose() * y;
  });

  Triplets triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (int e = 0; e < ne; ++e) {
    const SkeletonMap sm = skeleton_map(as, mesh.elements[e]);
    scatter(local[e].K, local[e].g, sm.index, sm.value, triplets, rhs);
  }
  const Eigen::VectorXd x = sparse_solve(n, triplets, rhs);

  DiscreteSolution s = empty_solution(as);
  s.multiplier = x[n - 1];
  for (const Face& face : mesh.faces)
    if (!map.boundary[face.id]) s.face[face.id] = x.segment(map.face_offset[face.id], map.face_dim[face.id]);
  for (int e = 0; e < ne; ++e) {
    const Condensed& c = local[e];
    const SkeletonMap sm = skeleton_map(as, mesh.elements[e]);
    Eigen::VectorXd xK(sm.index.size());
    for (std::size_t i = 0; i < sm.index.size(); ++i) xK[i] = sm.index[i] < 0 ? sm.value[i] : x[sm.index[i]];
    const Eigen::VectorXd xI = c.lu.solve(c.F_I - c.M_IK * xK);
    const int nc = map.cell_dim[e], np = map.pressure_dim[e];
    s.cell[e] = xI.head(nc);
    s.pressure[e].resize(np);
    s.pressure[e][0] = xK[xK.size() - 2];
    s.pressure[e].tail(np - 1) = xI.tail(np - 1);
  }
  reconstruct_fields(as, s);
  return s;
}

DiscreteSolution solve_full(const Assembly& as) {
  const Mesh& mesh = *as.disc->mesh;
  const GlobalDofMap& map = as.map;
  const int n = map.full_size();
  Triplets triplets;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const Element& element : mesh.elements) {
    const int e = element.id;
    const Eigen::MatrixXd M = local_system(as, e);
    std::vector<int> index;
    std::vector<double> known;
    for (int i = 0; i < map.cell_dim[e]; ++i) index.push_back(map.cell_offset[e] + i), known.push_back(0.0);
    for (const FaceRef& ref : element.faces) {
      for (int i = 0; i < map.face_dim[ref.face]; ++i) {
        index.push_back(map.boundary[ref.face] ? -1 : map.face_offset[ref.face] + i);
        known.push_back(map.boundary[ref.face] ? as.boundary_values[ref.face][i] : 0.0);
      }
    }
    for (int i = 0; i < map.pressure_dim[e]; ++i) index.push_back(map.pressure_offset[e] + i), known.push_back(0.0);
    index.push_back(n - 1);
    known.push_back(0.0);
    Eigen::VectorXd F = Eigen::VectorXd::Zero(M.rows());
    F.head(map.cell_dim[e]) = as.load[e];
    scatter(M, F, index, Eigen::Map<const Eigen::VectorXd>(known.data(), known.size()), triplets, rhs);
  }
  const Eigen::VectorXd x = sparse_solve(n, triplets, rhs);

  DiscreteSolution s = empty_solution(as);
  s.multiplier = x[n - 1];
  for (const Face& face : mesh.faces)
    if (!map.boundary[face.id]) s.face[face.id] = x.segment(map.face_offset[face.id], map.face_dim[face.id]);
  for (const Element& element : mesh.elements) {
    const int e = element.id;
    s.cell[e] = x.segment(map.cell_offset[e], map.cell_dim[e]);
    s.pressure[e] = x.segment(map.pressure_offset[e], map.pressure_dim[e]);
  }
  reconstruct_fields(as, s);
  return s;
}

void reconstruct_fields(const Assembly& as, DiscreteSolution& s) {
  const Mesh& mesh = *as.disc->mesh;
  s.recon.resize(mesh.elements.size());
  for (const Element& element : mesh.elements) s.recon[element.id] = as.ops[element.id].R * s.local(element);
}

SolutionResiduals residuals(const Assembly& as, const DiscreteSolution& s) {
  SolutionResiduals r;
  double mean = 0.0, u2 = 0.0, p2 = 0.0;
  for (const Element& element : as.disc->mesh->elements) {
    const int e = element.id;
    const Eigen::VectorXd b = as.ops[e].B * s.local(element);
    r.divergence = std::max(r.divergence, b.cwiseAbs().maxCoeff());
    mean += pressure_means(*as.disc, e).dot(s.pressure[e]);
    u2 += s.cell[e].squaredNorm();
    p2 += s.pressure[e].squaredNorm();
  }
  r.pressure_mean = std::abs(mean);
  r.velocity_norm = std::sqrt(u2);
  r.pressure_norm = std::sqrt(p2);
  return r;
}

}  // namespace hho
