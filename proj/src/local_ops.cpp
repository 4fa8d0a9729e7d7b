#include "hho/local_ops.hpp"

#include <set>

namespace hho {

namespace {

Eigen::VectorXd weights_of(const QuadratureRule& rule) {
  return Eigen::Map<const Eigen::VectorXd>(rule.weights.data(), static_cast<Eigen::Index>(rule.weights.size()));
}

// A^T diag(w) B.
Eigen::MatrixXd inner(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, const Eigen::MatrixXd& b) {
  return a.transpose() * w.asDiagonal() * b;
}

int base_degree(int k, bool enriched) { return 2 * (k + 2) + (enriched ? 4 : 0); }

// Smallest degree whose rule has at least `count` nodes, starting from `degree`.
template <class RuleAt>
int ensure_nodes(RuleAt&& rule_at, int degree, std::size_t count) {
  while (rule_at(degree).size() < count) degree += 2;
  return degree;
}

double enrichment_probe(const std::vector<CylinderSolution>& sols, const Point2& x) {
  double s = 0.0;
  for (const auto& sol : sols) {
    const VectorJet u = sol.velocity(x);
    const double p = sol.pressure(x).value;
    s += u.value.squaredNorm() + u.grad.squaredNorm() + p * p;
  }
  return s;
}

Eigen::MatrixXd solve_bordered(const Eigen::MatrixXd& K, const Eigen::MatrixXd& L, const Eigen::MatrixXd& rhs_top,
                               const Eigen::MatrixXd& rhs_mean) {
  const Eigen::Index n = K.rows(), m = L.rows();
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n + m, n + m);
  M.topLeftCorner(n, n) = K;
  M.topRightCorner(n, m) = L.transpose();
  M.bottomLeftCorner(m, n) = L;
  Eigen::MatrixXd rhs(n + m, rhs_top.cols());
  rhs << rhs_top, rhs_mean;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const Eigen::MatrixXd x = lu.solve(rhs);
  if (!x.allFinite() || (M * x - rhs).norm() > 1e-8 * (M.norm() * x.norm() + rhs.norm()))
    throw SolverError("singular reconstruction system");
  return x.topRows(n);
}

}  // namespace

Discretization build_discretization(const Mesh& mesh, int k, const EnrichmentConfig& enrichment,
                                    const ScalarFunction& data_probe) {
  if (k < 0) throw Error("polynomial degree must be nonnegative");
  Discretization disc;
  disc.mesh = &mesh;
  disc.k = k;
  disc.enrichment = enrichment;

  auto solutions = [&](const std::vector<int>& ids) {
    std::vector<CylinderSolution> sols;
    for (int i : ids) sols.push_back({enrichment.cylinders[i], enrichment.U, 0.0});
    return sols;
  };

  disc.element_rules.reserve(mesh.elements.size());
  disc.element_spaces.reserve(mesh.elements.size());
  for (const auto& e : mesh.elements) {
    const auto active = active_cylinders(e, enrichment);
    const auto sols = solutions(active);
    auto rule_at = [&](int d) { return element_rule(mesh, e, d); };
    int degree = base_degree(k, !active.empty());
    if (!active.empty() || data_probe) {
      auto probe = [&](const Point2& x) {
        return 1.0 + enrichment_probe(sols, x) + (data_probe ? data_probe(x) : 0.0);
      };
      degree = adaptive_integrate(rule_at, probe, degree).degree;
    }
    const std::size_t nspan = (k + 2) * (k + 3) + 2 * active.size();
    disc.element_rules.push_back(rule_at(ensure_nodes(rule_at, degree, nspan)));
    disc.element_spaces.push_back(build_local_spaces(e, k, enrichment, disc.element_rules.back()));
  }

  disc.face_rules.reserve(mesh.faces.size());
  disc.face_spaces.reserve(mesh.faces.size());
  for (const auto& f : mesh.faces) {
    std::set<int> ids;
    for (int e : f.elements)
      if (e >= 0)
        for (int i : active_cylinders(mesh.elements[e], enrichment)) ids.insert(i);
    const auto sols = solutions({ids.begin(), ids.end()});
    auto rule_at = [&](int d) { return face_rule(f, d, mesh.cylinders); };
    int degree = base_degree(k, !ids.empty());
    if (!ids.empty() || data_probe) {
      auto probe = [&](const Point2& x) {
        return 1.0 + enrichment_probe(sols, x) + (data_probe ? data_probe(x) : 0.0);
      };
      degree = adaptive_integrate(rule_at, probe, degree).degree;
    }
    const std::size_t nspan = face_poly_spanning(f, k).size() + 2 * ids.size();
    disc.face_rules.push_back(rule_at(ensure_nodes(rule_at, degree, nspan)));
    disc.face_spaces.push_back(build_face_space(mesh, f, k, enrichment, disc.face_rules.back()));
  }
  return disc;
}

LocalContext make_context(const Discretization& disc, int element) {
  LocalContext ctx;
  ctx.disc = &disc;
  ctx.element = &disc.mesh->elements[element];
  const LocalSpaces& sp = ctx.spaces();
  const QuadratureRule& rule = ctx.rule();

  ctx.recon = tabulate(sp.recon, rule.points);
  ctx.cell = tabulate(sp.cell, rule.points);
  ctx.pressure = tabulate(sp.pressure, rule.points);

  ctx.layout.cell_dim = sp.cell.dim();
  ctx.layout.pressure_dim = sp.pressure.dim();
  int offset = ctx.layout.cell_dim;
  for (std::size_t i = 0; i < ctx.element->faces.size(); ++i) {
    const FaceRef& ref = ctx.element->faces[i];
    const QuadratureRule& fr = disc.face_rules[ref.face];
    const FaceSpace& fs = disc.face_spaces[ref.face];
    std::vector<Vector2> normals;
    for (const auto& n : fr.normals) normals.push_back(static_cast<double>(ref.orientation) * n);
    ctx.face_normals.push_back(std::move(normals));
    ctx.face_recon.push_back(tabulate(sp.recon, fr.points));
    ctx.face_basis.push_back(tabulate(fs, fr));
    ctx.face_pressure.push_back(tabulate(sp.pressure, fr.points));
    ctx.layout.face_dims.push_back(fs.dim());
    ctx.layout.face_offsets.push_back(offset);
    offset += fs.dim();
  }
  ctx.layout.total = offset;
  return ctx;
}

LocalOperators local_operators(const LocalContext& ctx) {
  LocalOperators ops;
  ops.layout = ctx.layout;
  const LocalLayout& lay = ctx.layout;
  const Eigen::VectorXd w = weights_of(ctx.rule());
  const VectorTable& rc = ctx.recon;
  const VectorTable& cl = ctx.cell;
  const int nr = static_cast<int>(rc.vx.cols());
  const int nt = lay.total;

  ops.G = inner(rc.gxx, w, rc.gxx) + inner(rc.gxy, w, rc.gxy) + inner(rc.gyx, w, rc.gyx) + inner(rc.gyy, w, rc.gyy);

  // Right-hand side of the reconstruction: -(v_T, lap w) + sum_F (v_F, grad w n_TF).
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(nr, nt);
  rhs.leftCols(lay.cell_dim) = -(inner(rc.lx, w, cl.vx) + inner(rc.ly, w, cl.vy));
  // Divergence: -(v_T, grad q) + sum_F (v_F, q n_TF).
  const int np = lay.pressure_dim;
  ops.D = Eigen::MatrixXd::Zero(np, nt);
  ops.D.leftCols(lay.cell_dim) = -(inner(ctx.pressure.dx, w, cl.vx) + inner(ctx.pressure.dy, w, cl.vy));

  for (std::size_t f = 0; f < ctx.face_basis.size(); ++f) {
    const Eigen::VectorXd wf = weights_of(ctx.face_rule(static_cast<int>(f)));
    const auto& n = ctx.face_normals[f];
    Eigen::VectorXd nx(n.size()), ny(n.size());
    for (std::size_t q = 0; q < n.size(); ++q) nx[q] = n[q].x(), ny[q] = n[q].y();
    const VectorTable& fr = ctx.face_recon[f];
    const FaceTable& fb = ctx.face_basis[f];
    const Eigen::MatrixXd gnx = nx.asDiagonal() * fr.gxx + ny.asDiagonal() * fr.gxy;
    const Eigen::MatrixXd gny = nx.asDiagonal() * fr.gyx + ny.asDiagonal() * fr.gyy;
    const int off = lay.face_offsets[f], dim = lay.face_dims[f];
    rhs.middleCols(off, dim) = inner(gnx, wf, fb.vx) + inner(gny, wf, fb.vy);
    const Eigen::MatrixXd& q = ctx.face_pressure[f].value;
    ops.D.middleCols(off, dim) = inner(nx.asDiagonal() * q, wf, fb.vx) + inner(ny.asDiagonal() * q, wf, fb.vy);
  }

  // Mean closure: int (R v - v_T) = 0 componentwise.
  Eigen::MatrixXd L(2, nr), mean = Eigen::MatrixXd::Zero(2, nt);
  L.row(0) = w.transpose() * rc.vx;
  L.row(1) = w.transpose() * rc.vy;
  mean.block(0, 0, 1, lay.cell_dim) = w.transpose() * cl.vx;
  mean.block(1, 0, 1, lay.cell_dim) = w.transpose() * cl.vy;
  ops.R = solve_bordered(ops.G, L, rhs, mean);

  // Stabilisation with L2 projections onto the enriched V_T and V_F.
  const double h = ctx.element->diameter;
  const Eigen::MatrixXd cell_recon = inner(cl.vx, w, rc.vx) + inner(cl.vy, w, rc.vy);
  Eigen::MatrixXd dT = -cell_recon * ops.R;
  dT.leftCols(lay.cell_dim) += Eigen::MatrixXd::Identity(lay.cell_dim, lay.cell_dim);
  ops.S = dT.transpose() * dT / (h * h);
  for (std::size_t f = 0; f < ctx.face_basis.size(); ++f) {
    const Eigen::VectorXd wf = weights_of(ctx.face_rule(static_cast<int>(f)));
    const FaceTable& fb = ctx.face_basis[f];
    const VectorTable& fr = ctx.face_recon[f];
    const Eigen::MatrixXd face_recon = inner(fb.vx, wf, fr.vx) + inner(fb.vy, wf, fr.vy);
    Eigen::MatrixXd dF = -face_recon * ops.R;
    dF.middleCols(lay.face_offsets[f], lay.face_dims[f]) += Eigen::MatrixXd::Identity(lay.face_dims[f], lay.face_dims[f]);
    ops.S += dF.transpose() * dF / h;
  }
  ops.S = 0.5 * (ops.S + ops.S.transpose());

  ops.A = ops.R.transpose() * ops.G * ops.R + ops.S;
  ops.A = 0.5 * (ops.A + ops.A.transpose());
  ops.B = -ops.D;
  return ops;
}

Eigen::VectorXd elliptic_project(const LocalContext& ctx, const VectorJetFunction& v) {
  const QuadratureRule& rule = ctx.rule();
  const Eigen::VectorXd w = weights_of(rule);
  const VectorTable& rc = ctx.recon;
  const auto nq = static_cast<Eigen::Index>(rule.size());
  Eigen::VectorXd vx(nq), vy(nq), g00(nq), g01(nq), g10(nq), g11(nq);
  for (Eigen::Index q = 0; q < nq; ++q) {
    const VectorJet j = v(rule.points[q]);
    vx[q] = j.value.x(), vy[q] = j.value.y();
    g00[q] = j.grad(0, 0), g01[q] = j.grad(0, 1), g10[q] = j.grad(1, 0), g11[q] = j.grad(1, 1);
  }
  const Eigen::MatrixXd G =
      inner(rc.gxx, w, rc.gxx) + inner(rc.gxy, w, rc.gxy) + inner(rc.gyx, w, rc.gyx) + inner(rc.gyy, w, rc.gyy);
  const Eigen::VectorXd rhs = inner(rc.gxx, w, g00) + inner(rc.gxy, w, g01) + inner(rc.gyx, w, g10) + inner(rc.gyy, w, g11);
  Eigen::MatrixXd L(2, rc.vx.cols());
  L.row(0) = w.transpose() * rc.vx;
  L.row(1) = w.transpose() * rc.vy;
  Eigen::MatrixXd mean(2, 1);
  mean << w.dot(vx), w.dot(vy);
  return solve_bordered(G, L, rhs, mean);
}

Eigen::VectorXd project_recon(const LocalContext& ctx, const VectorFunction& v) {
  const QuadratureRule& rule = ctx.rule();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ctx.recon.vx.cols());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vector2 val = rule.weights[q] * v(rule.points[q]);
    out += val.x() * ctx.recon.vx.row(q).transpose() + val.y() * ctx.recon.vy.row(q).transpose();
  }
  return out;
}

Eigen::VectorXd project_cell(const LocalContext& ctx, const VectorFunction& v) {
  const QuadratureRule& rule = ctx.rule();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ctx.layout.cell_dim);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vector2 val = rule.weights[q] * v(rule.points[q]);
    out += val.x() * ctx.cell.vx.row(q).transpose() + val.y() * ctx.cell.vy.row(q).transpose();
  }
  return out;
}

Eigen::VectorXd project_pressure(const LocalContext& ctx, const ScalarFunction& p) {
  const QuadratureRule& rule = ctx.rule();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(ctx.layout.pressure_dim);
  for (std::size_t q = 0; q < rule.size(); ++q)
    out += rule.weights[q] * p(rule.points[q]) * ctx.pressure.value.row(q).transpose();
  return out;
}

Eigen::VectorXd project_face(const Discretization& disc, int face, const VectorFunction& v) {
  const QuadratureRule& rule = disc.face_rules[face];
  const FaceTable t = tabulate(disc.face_spaces[face], rule);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(t.vx.cols());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vector2 val = rule.weights[q] * v(rule.points[q]);
    out += val.x() * t.vx.row(q).transpose() + val.y() * t.vy.row(q).transpose();
  }
  return out;
}

Eigen::VectorXd interpolate(const LocalContext& ctx, const VectorFunction& v) {
  Eigen::VectorXd out(ctx.layout.total);
  out.head(ctx.layout.cell_dim) = project_cell(ctx, v);
  for (std::size_t f = 0; f < ctx.face_basis.size(); ++f) {
    const QuadratureRule& rule = ctx.face_rule(static_cast<int>(f));
    const FaceTable& t = ctx.face_basis[f];
    Eigen::VectorXd block = Eigen::VectorXd::Zero(t.vx.cols());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const Vector2 val = rule.weights[q] * v(rule.points[q]);
      block += val.x() * t.vx.row(q).transpose() + val.y() * t.vy.row(q).transpose();
    }
    out.segment(ctx.layout.face_offsets[f], ctx.layout.face_dims[f]) = block;
  }
  return out;
}

}  // namespace hho
