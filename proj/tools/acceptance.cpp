// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "hho/experiments.hpp"

using namespace hho;

namespace {

struct Outcome {
  bool pass{false};
  std::string detail;
};

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

const Circle kCylinder{{0.5, 0.5}, 0.1};

// Saddle-point residuals of every solve, checked by criterion 6.
struct HealthLog {
  double worst_divergence{0.0};
  double worst_mean{0.0};
  int solves{0};
  void record(const SolutionResiduals& r) {
    worst_divergence = std::max(worst_divergence, r.divergence / r.velocity_norm);
    worst_mean = std::max(worst_mean, r.pressure_mean / r.pressure_norm);
    ++solves;
  }
  void record(const ErrorReport& report) {
    for (const auto& row : report.rows) record(row.residuals);
  }
} health;

// v = (a0 sin(b0 x + c0 y + d0), a1 sin(b1 x + c1 y + d1)), optionally plus the cylinder velocity.
VectorJet smooth_field(const Eigen::Matrix<double, 2, 4>& p, const Point2& x) {
  VectorJet j;
  for (int i = 0; i < 2; ++i) {
    const double arg = p(i, 1) * x.x() + p(i, 2) * x.y() + p(i, 3);
    j.value[i] = p(i, 0) * std::sin(arg);
    j.grad(i, 0) = p(i, 0) * p(i, 1) * std::cos(arg);
    j.grad(i, 1) = p(i, 0) * p(i, 2) * std::cos(arg);
    j.lap[i] = -p(i, 0) * (p(i, 1) * p(i, 1) + p(i, 2) * p(i, 2)) * std::sin(arg);
  }
  return j;
}

Outcome commutation() {
  const Mesh mesh = build_cartesian_cut_mesh(16, {kCylinder});
  std::mt19937 gen(1);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<Eigen::Matrix<double, 2, 4>> params(3);
  for (auto& p : params)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 4; ++j) p(i, j) = u(gen);
  const CylinderSolution cyl{kCylinder};
  std::vector<VectorJetFunction> fields;
  for (std::size_t f = 0; f < params.size(); ++f) {
    // Adding the cylinder velocity to the first field exercises the enrichment.
    const bool with_cylinder = f == 0;
    fields.push_back([&, f, with_cylinder](const Point2& x) {
      VectorJet j = smooth_field(params[f], x);
      if (with_cylinder) {
        const VectorJet c = cyl.velocity(x);
        j.value += c.value;
        j.grad += c.grad;
        j.lap += c.lap;
      }
      return j;
    });
  }
  // Rule degrees adapt to the fields, as they do to the data of a solve.
  auto probe = [&](const Point2& x) {
    double s = 0.0;
    for (const auto& v : fields) {
      const VectorJet j = v(x);
      s += j.value.squaredNorm() + j.grad.squaredNorm();
    }
    return s;
  };
  double worst_r = 0.0, worst_d = 0.0;
  for (int k : {0, 1}) {
    for (double gamma : {0.0, 0.2}) {
      const Discretization disc = build_discretization(mesh, k, {gamma, {kCylinder}}, probe);
      for (const auto& v : fields) {
        double num_r = 0.0, den_r = 0.0, num_d = 0.0, den_d = 0.0;
        for (const Element& e : mesh.elements) {
          const LocalContext ctx = make_context(disc, e.id);
          const LocalOperators ops = local_operators(ctx);
          const Eigen::VectorXd iv = interpolate(ctx, [&](const Point2& x) { return v(x).value; });
          const Eigen::VectorXd r = elliptic_project(ctx, v);
          const Eigen::VectorXd d = project_pressure(ctx, [&](const Point2& x) { return v(x).grad.trace(); });
          num_r = std::max(num_r, (ops.R * iv - r).norm());
          den_r = std::max(den_r, r.norm());
          num_d = std::max(num_d, (ops.D * iv - d).norm());
          den_d = std::max(den_d, d.norm());
        }
        worst_r = std::max(worst_r, num_r / den_r);
        worst_d = std::max(worst_d, num_d / den_d);
      }
    }
  }
  return {worst_r < 1e-9 && worst_d < 1e-9,
          "reconstruction " + sci(worst_r) + ", divergence " + sci(worst_d) + " (relative, limit 1e-9)"};
}

// S vanishes on interpolates of V_recon. Checked on the kept spanning functions
// (scaled monomials and enrichment functions), which form a basis of V_recon.
// The orthonormalised basis is a recombination whose coefficients grow where an
// enrichment function is nearly polynomial; its residual is reported alongside.
Outcome stabilisation() {
  const Mesh mesh = build_cartesian_cut_mesh(16, {kCylinder});
  std::vector<int> cut, uncut;
  for (const Element& e : mesh.elements) (e.is_cut() ? cut : uncut).push_back(e.id);
  std::mt19937 gen(2);
  std::shuffle(cut.begin(), cut.end(), gen);
  std::shuffle(uncut.begin(), uncut.end(), gen);
  cut.resize(std::min<std::size_t>(cut.size(), 25));
  std::vector<int> elements(cut);
  elements.insert(elements.end(), uncut.begin(), uncut.begin() + (50 - cut.size()));
  double worst = 0.0, worst_orthonormal = 0.0;
  for (int k : {0, 1}) {
    for (double gamma : {0.0, 0.2}) {
      const Discretization disc = build_discretization(mesh, k, {gamma, {kCylinder}});
      for (int id : elements) {
        const LocalContext ctx = make_context(disc, id);
        const LocalOperators ops = local_operators(ctx);
        const auto& sp = ctx.spaces().recon;
        for (int i : sp.kept) {
          const Eigen::VectorXd iw = interpolate(ctx, [&](const Point2& x) { return sp.spanning[i].jet(x).value; });
          worst = std::max(worst, (ops.S * iw).norm());
        }
        for (int j = 0; j < sp.dim(); ++j) {
          const Eigen::VectorXd iw = interpolate(ctx, [&](const Point2& x) { return Vector2(evaluate(sp, x).col(j)); });
          worst_orthonormal = std::max(worst_orthonormal, (ops.S * iw).norm());
        }
      }
    }
  }
  return {worst < 1e-10, "max |S I(w)| = " + sci(worst) + " (limit 1e-10) over 50 elements (" + std::to_string(cut.size()) + " cut), k in {0,1}, " +
                             "with and without enrichment; orthonormal basis " + sci(worst_orthonormal)};
}

Outcome exactness() {
  ExperimentConfig c;
  c.k = 0;
  c.gamma = 10.0;
  c.radius = 0.1;
  c.meshes = {8};
  c.solution = TestASolution::cylinder;
  const ErrorReport r = run(c);
  health.record(r);
  const auto& e = r.rows[0].errors;
  const double worst = std::max({e[0], e[1], e[2]});
  return {worst < 1e-8, "E0 " + sci(e[0]) + ", Ea " + sci(e[1]) + ", Ep " + sci(e[2]) + " (limit 1e-8)"};
}

double ls_slope(const std::vector<double>& h, const std::vector<double>& err) {
  const std::size_t n = h.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) mx += std::log(h[i]) / n, my += std::log(err[i]) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (std::log(h[i]) - mx) * (std::log(err[i]) - my);
    sxx += std::pow(std::log(h[i]) - mx, 2);
  }
  return sxy / sxx;
}

Outcome convergence() {
  bool pass = true;
  std::ostringstream detail;
  detail << std::fixed << std::setprecision(2);
  for (int k : {0, 1}) {
    ExperimentConfig c;
    c.k = k;
    c.gamma = 0.2;
    c.radius = 0.1;
    c.meshes = {4, 8, 16, 32};
    const ErrorReport r = run(c);
    health.record(r);
    std::vector<double> h, ea, ep;
    for (const auto& row : r.rows) h.push_back(row.h), ea.push_back(row.errors[1]), ep.push_back(row.errors[2]);
    const double sa = ls_slope(h, ea), sp = ls_slope(h, ep);
    pass = pass && sa >= k + 1 - 0.2 && sp >= k + 1 - 0.3;
    detail << "k=" << k << ": Ea slope " << sa << " (>= " << k + 0.8 << "), Ep slope " << sp << " (>= " << k + 0.7
           << ")" << (k == 0 ? "; " : "");
  }
  return {pass, detail.str()};
}

Outcome enrichment_gain() {
  ExperimentConfig c;
  c.k = 0;
  c.radius = 0.01;
  c.meshes = {16};
  c.gamma = 0.0;
  const ErrorReport plain = run(c);
  c.gamma = 0.2;
  const ErrorReport rich = run(c);
  health.record(plain);
  health.record(rich);
  const double a = plain.rows[0].errors[1], b = rich.rows[0].errors[1];
  return {b <= 0.5 * a, "enriched Ea " + sci(b) + " vs non-enriched " + sci(a) + " (ratio " + sci(b / a) + ", limit 0.5)"};
}

double max_difference(const std::vector<Eigen::VectorXd>& a, const std::vector<Eigen::VectorXd>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, (a[i] - b[i]).cwiseAbs().maxCoeff());
  return d;
}

Outcome condensation() {
  ExperimentConfig c;
  c.k = 1;
  c.gamma = 0.2;
  const auto sc = solve_case(c, 4);
  health.record(residuals(sc->assembly, sc->solution));
  const DiscreteSolution full = solve_full(sc->assembly);
  const double d = std::max({max_difference(sc->solution.cell, full.cell), max_difference(sc->solution.face, full.face),
                             max_difference(sc->solution.pressure, full.pressure)});
  return {d < 1e-10, "max coefficient difference " + sci(d) + " (limit 1e-10)"};
}

// Singular values of the sampled trace spanning set of a face, columns scaled to unit norm.
Eigen::VectorXd trace_singular_values(const Face& f, int k, const std::vector<Circle>& active) {
  const QuadratureRule rule = face_rule(f, 4 * (k + 2) + 20);
  std::vector<std::function<Vector2(const FacePoint&)>> fns;
  for (const FaceField& fld : face_poly_spanning(f, k)) fns.push_back(fld.value);
  for (const Circle& c : active) {
    const CylinderSolution sol{c};
    fns.push_back([sol](const FacePoint& p) { return Vector2(sol.velocity(p.x).grad * p.normal); });
    fns.push_back([sol](const FacePoint& p) { return Vector2(sol.pressure(p.x).value * p.normal); });
  }
  Eigen::MatrixXd W(2 * rule.size(), fns.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const FacePoint p{rule.points[q], rule.normals[q], rule.params[q]};
    for (std::size_t j = 0; j < fns.size(); ++j) W.block<2, 1>(2 * q, j) = std::sqrt(rule.weights[q]) * fns[j](p);
  }
  // Column scaling makes the threshold independent of the function magnitudes.
  // Identically vanishing traces (p_hat on a line through the center) add nothing.
  for (Eigen::Index j = 0; j < W.cols(); ++j) {
    const double norm = W.col(j).norm();
    if (norm > 0.0) W.col(j) /= norm;
  }
  return Eigen::JacobiSVD<Eigen::MatrixXd>(W).singularValues();
}

int rank_at(const Eigen::VectorXd& s, double tolerance) {
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) rank += s[i] > tolerance * s[0];
  return rank;
}

// Tracks faces whose numerical rank depends on the threshold.
int sensitive_faces = 0;

int trace_rank(const Face& f, int k, const std::vector<Circle>& active) {
  const Eigen::VectorXd s = trace_singular_values(f, k, active);
  sensitive_faces += rank_at(s, 1e-8) != rank_at(s, 1e-12);
  return rank_at(s, kPruneTolerance);
}

Outcome dof_accounting() {
  bool pass = true;
  int checked = 0, enriched_faces = 0;
  std::string first_failure;
  for (int n : {4, 8, 16, 32}) {
    for (int k : {0, 1}) {
      for (double gamma : {0.0, 0.2}) {
        const Mesh mesh = build_cartesian_cut_mesh(n, {kCylinder});
        const Discretization disc = build_discretization(mesh, k, {gamma, {kCylinder}});
        StokesProblem p;
        p.mesh = &mesh;
        p.k = k;
        const Assembly as = assemble(p, disc);
        int expect = static_cast<int>(mesh.elements.size());
        for (const Face& f : mesh.faces) {
          if (f.is_boundary()) continue;
          std::vector<Circle> active;
          bool enriched = false;
          for (int e : f.elements) enriched = enriched || !active_cylinders(mesh.elements[e], disc.enrichment).empty();
          if (enriched) active.push_back(kCylinder), ++enriched_faces;
          expect += trace_rank(f, k, active);
        }
        ++checked;
        if (count_dofs(disc) != expect || as.map.condensed_dofs() != expect) {
          pass = false;
          if (first_failure.empty())
            first_failure = "; mismatch at n=" + std::to_string(n) + " k=" + std::to_string(k) + ": " +
                            std::to_string(count_dofs(disc)) + " vs " + std::to_string(expect);
        }
      }
    }
  }
  // Test B layout, four cylinders.
  for (int n : default_meshes(TestCase::B)) {
    const Mesh mesh = build_cartesian_cut_mesh(n, test_b_cylinders());
    const Discretization disc = build_discretization(mesh, 1, {0.2, mesh.cylinders});
    int expect = static_cast<int>(mesh.elements.size());
    for (const Face& f : mesh.faces) {
      if (f.is_boundary()) continue;
      std::set<int> ids;
      for (int e : f.elements)
        for (int i : active_cylinders(mesh.elements[e], disc.enrichment)) ids.insert(i);
      std::vector<Circle> active;
      for (int i : ids) active.push_back(mesh.cylinders[i]);
      enriched_faces += !active.empty();
      expect += trace_rank(f, 1, active);
    }
    ++checked;
    if (count_dofs(disc) != expect) {
      pass = false;
      if (first_failure.empty()) first_failure = "; mismatch on Test B n=" + std::to_string(n);
    }
  }
  return {pass, std::to_string(checked) + " discretizations, " + std::to_string(enriched_faces) +
                    " enriched internal faces recounted from trace ranks at the pruning tolerance, " +
                    std::to_string(sensitive_faces) + " with a rank that changes between 1e-8 and 1e-12" + first_failure};
}

// Second-order central first derivative along e.
template <class F>
double d1(F&& f, const Point2& x, const Vector2& e) {
  return (f(x + e) - f(x - e)) / (2 * e.norm());
}

// Fourth-order central first and second derivatives along e.
template <class F>
double d1_4(F&& f, const Point2& x, const Vector2& e) {
  return (-f(x + 2 * e) + 8 * f(x + e) - 8 * f(x - e) + f(x - 2 * e)) / (12 * e.norm());
}

template <class F>
double d2_4(F&& f, const Point2& x, const Vector2& e) {
  return (-f(x + 2 * e) + 16 * f(x + e) - 30 * f(x) + 16 * f(x - e) - f(x - 2 * e)) / (12 * e.squaredNorm());
}

Outcome analytic_checks() {
  const CylinderSolution sol{kCylinder};
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0), angle(0.0, 2.0 * pi);
  std::vector<Point2> points;
  while (points.size() < 100) {
    const Point2 p(unit(gen), unit(gen));
    if ((p - kCylinder.center).norm() > 1.05 * kCylinder.radius) points.push_back(p);
  }
  auto ux = [&](const Point2& y) { return sol.velocity(y).value.x(); };
  auto uy = [&](const Point2& y) { return sol.velocity(y).value.y(); };
  auto p = [&](const Point2& y) { return sol.pressure(y).value; };
  double div = 0.0, momentum = 0.0, wall = 0.0, biharmonic = 0.0;
  for (const Point2& x : points) {
    const Vector2 ex(1e-6, 0.0), ey(0.0, 1e-6);
    div = std::max(div, std::abs(d1(ux, x, ex) + d1(uy, x, ey)));
    const Vector2 hx(5e-4, 0.0), hy(0.0, 5e-4);
    momentum = std::max(momentum, std::abs(-d2_4(ux, x, hx) - d2_4(ux, x, hy) + d1_4(p, x, hx)));
    momentum = std::max(momentum, std::abs(-d2_4(uy, x, hx) - d2_4(uy, x, hy) + d1_4(p, x, hy)));
    wall = std::max(wall, sol.velocity(kCylinder.center + kCylinder.radius * unit_direction(angle(gen))).value.norm());
  }
  // The biharmonic stencil is checked at unit scale (R = 0.5, 2R <= r <= 6R),
  // where O(h^2) truncation and round-off amplified by h^-4 both stay small.
  const double R = 0.5, h = 3e-3;
  auto psi = [&](const Point2& y) { return stream_zeta1(y.norm(), R) * y.y() / y.norm(); };
  std::uniform_real_distribution<double> radius(2 * R, 6 * R);
  for (int i = 0; i < 100; ++i) {
    const Point2 x = radius(gen) * unit_direction(angle(gen));
    auto at = [&](double i, double j) { return psi(x + Vector2(i * h, j * h)); };
    const double b = 20 * at(0, 0) - 8 * (at(1, 0) + at(-1, 0) + at(0, 1) + at(0, -1)) +
                     2 * (at(1, 1) + at(-1, 1) + at(1, -1) + at(-1, -1)) + at(2, 0) + at(-2, 0) + at(0, 2) + at(0, -2);
    biharmonic = std::max(biharmonic, std::abs(b) / std::pow(h, 4));
  }
  const bool pass = div < 1e-6 && momentum < 1e-5 && wall < 1e-12 && biharmonic < 1e-3;
  return {pass, "div " + sci(div) + " (1e-6), momentum " + sci(momentum) + " (1e-5), wall " + sci(wall) +
                    " (1e-12), biharmonic " + sci(biharmonic) + " (1e-3), 100 points each"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "commutation identities", commutation},
      {2, "stabilisation consistency", stabilisation},
      {3, "enrichment exactness", exactness},
      {4, "convergence order", convergence},
      {5, "enrichment gain", enrichment_gain},
      {7, "static condensation exactness", condensation},
      {8, "DOF accounting", dof_accounting},
      {9, "analytic solution", analytic_checks},
  };
  std::vector<std::pair<int, std::string>> lines;
  bool all = true;
  auto report = [&](int id, const char* name, const Outcome& o, double seconds) {
    std::ostringstream os;
    os << (o.pass ? "PASS" : "FAIL") << " criterion " << id << " (" << name << "): " << o.detail << " [" << std::fixed
       << std::setprecision(1) << seconds << " s]";
    lines.emplace_back(id, os.str());
    all = all && o.pass;
  };
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    report(c.id, c.name, o, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  }
  // Health of every solve made above, plus one four-cylinder solve.
  const auto t0 = std::chrono::steady_clock::now();
  bool healthy_b = true;
  try {
    ExperimentConfig b;
    b.test = TestCase::B;
    b.k = 1;
    b.gamma = 0.2;
    const auto sc = solve_case(b, default_meshes(TestCase::B).front());
    health.record(residuals(sc->assembly, sc->solution));
  } catch (const std::exception& e) {
    std::cerr << "four-cylinder solve failed: " << e.what() << '\n';
    healthy_b = false;
  }
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool healthy = healthy_b && health.solves > 0 && health.worst_divergence < 1e-10 && health.worst_mean < 1e-10;
  report(6, "saddle-point health",
         {healthy, std::to_string(health.solves) + " solves, max |b(u,q)|/|u| " + sci(health.worst_divergence) +
                       ", max |mean p|/|p| " + sci(health.worst_mean) + " (limit 1e-10)"},
         seconds);
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::cout << line << '\n';
  std::cout << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << '\n';
  return all ? 0 : 1;
}
