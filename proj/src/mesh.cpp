#include "hho/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace hho {

namespace {

constexpr double kDegenerateTol = 1e-12;

// 20-point Gauss-Legendre on [0,1], used for loop moments only.
const std::vector<std::pair<double, double>>& moment_rule() {
  static const std::vector<std::pair<double, double>> rule = [] {
    std::vector<std::pair<double, double>> r;
    const int n = 20;
    for (int i = 1; i <= n; ++i) {
      double x = std::cos(pi * (i - 0.25) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      r.emplace_back(0.5 * (1.0 - x), 1.0 / ((1.0 - x * x) * dp * dp));
    }
    return r;
  }();
  return rule;
}

// A boundary piece in traversal order: either a segment from `a` to `b`, or an
// arc traversed from angle `from` to angle `to`.
struct Piece {
  bool arc{false};
  Point2 a, b;
  int cylinder{-1};
  double from{0.0}, to{0.0};
};

Point2 piece_point(const Piece& p, const std::vector<Circle>& cyl, double t) {
  if (!p.arc) return p.a + t * (p.b - p.a);
  const double th = p.from + t * (p.to - p.from);
  return cyl[p.cylinder].center + cyl[p.cylinder].radius * unit_direction(th);
}

Vector2 piece_tangent(const Piece& p, const std::vector<Circle>& cyl, double t) {
  if (!p.arc) return p.b - p.a;
  const double th = p.from + t * (p.to - p.from);
  return cyl[p.cylinder].radius * (p.to - p.from) * Vector2(-std::sin(th), std::cos(th));
}

struct LoopMoments {
  double area{0.0};
  Point2 first{0.0, 0.0};
};

LoopMoments loop_moments(const std::vector<Piece>& pieces, const std::vector<Circle>& cyl) {
  LoopMoments m;
  double mx = 0.0, my = 0.0;
  for (const auto& p : pieces) {
    for (const auto& [t, w] : moment_rule()) {
      const Point2 x = piece_point(p, cyl, t);
      const Vector2 dx = piece_tangent(p, cyl, t);
      m.area += w * x.x() * dx.y();
      mx += w * 0.5 * x.x() * x.x() * dx.y();
      my += w * x.x() * x.y() * dx.y();
    }
  }
  m.first = Point2(mx / m.area, my / m.area);
  return m;
}

struct PointKey {
  double x, y;
  bool operator<(const PointKey& o) const { return x < o.x || (x == o.x && y < o.y); }
};

std::vector<double> circle_hits_horizontal(double y, const Circle& c, double xa, double xb) {
  const double dy = y - c.center.y();
  const double lo = std::min(xa, xb), hi = std::max(xa, xb);
  if (std::abs(std::abs(dy) - c.radius) < kDegenerateTol && c.center.x() >= lo && c.center.x() <= hi)
    throw MeshError("cylinder boundary tangent to a grid line");
  if (std::abs(dy) >= c.radius) return {};
  const double s = std::sqrt(c.radius * c.radius - dy * dy);
  std::vector<double> out;
  for (double x : {c.center.x() - s, c.center.x() + s})
    if (x > lo - kDegenerateTol && x < hi + kDegenerateTol) out.push_back(x);
  return out;
}

std::vector<double> circle_hits_vertical(double x, const Circle& c, double ya, double yb) {
  Circle swapped{Point2(c.center.y(), c.center.x()), c.radius};
  return circle_hits_horizontal(x, swapped, ya, yb);
}

struct Rect {
  Box box;
  int cylinder{-1};
};

}  // namespace

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::internal: return "internal";
    case BoundaryKind::square_boundary: return "square_boundary";
    case BoundaryKind::cylinder_boundary: return "cylinder_boundary";
  }
  return "unknown";
}

Vector2 Face::normal_at(const Point2& x) const {
  if (is_arc()) return (x - arc().circle.center) / arc().circle.radius;
  const Vector2 t = (segment().b - segment().a).normalized();
  return {t.y(), -t.x()};
}

Point2 Face::start() const { return is_arc() ? arc().point(arc().theta0) : segment().a; }
Point2 Face::end() const { return is_arc() ? arc().point(arc().theta1) : segment().b; }

std::size_t Mesh::num_internal_faces() const {
  return static_cast<std::size_t>(
      std::count_if(faces.begin(), faces.end(), [](const Face& f) { return !f.is_boundary(); }));
}

bool Mesh::contains(const Element& element, const Point2& p) const {
  if (p.x() < element.cell.x0 || p.x() > element.cell.x1 || p.y() < element.cell.y0 ||
      p.y() > element.cell.y1)
    return false;
  // Crossing number along a ray in a generic direction, so that grid-aligned
  // points do not hit vertices. Each piece includes the
  // start of its traversal and excludes the end.
  const Vector2 d = unit_direction(0.3123);
  int crossings = 0;
  for (const auto& ref : element.faces) {
    const Face& f = faces[ref.face];
    if (!f.is_arc()) {
      const Point2 a = f.segment().a;
      const Vector2 e = f.segment().b - a;
      const double den = cross(d, e);
      if (den == 0.0) continue;
      const double t = cross(a - p, e) / den;
      const double s = cross(a - p, d) / den;
      const bool inside = ref.orientation > 0 ? (s >= 0.0 && s < 1.0) : (s > 0.0 && s <= 1.0);
      if (t > 0.0 && inside) ++crossings;
      continue;
    }
    const Arc& arc = f.arc();
    const Vector2 w = p - arc.circle.center;
    const double b = w.dot(d);
    const double disc = b * b - (w.squaredNorm() - arc.circle.radius * arc.circle.radius);
    if (disc <= 0.0) continue;
    for (double t : {-b - std::sqrt(disc), -b + std::sqrt(disc)}) {
      if (t <= 0.0) continue;
      const Vector2 q = w + t * d;
      double th = std::atan2(q.y(), q.x());
      while (th <= arc.theta0) th += 2.0 * pi;
      while (th > arc.theta0 + 2.0 * pi) th -= 2.0 * pi;
      if (th <= arc.theta1) ++crossings;  // traversed from theta1 to theta0
    }
  }
  return crossings % 2 == 1;
}

std::optional<int> Mesh::locate(const Point2& p) const {
  for (const auto& e : elements)
    if (contains(e, p)) return e.id;
  return std::nullopt;
}

Mesh build_cartesian_cut_mesh(int n, const std::vector<Circle>& cylinders, double min_area_fraction) {
  if (n < 2) throw MeshError("need at least 2 subdivisions per side");
  for (std::size_t i = 0; i < cylinders.size(); ++i) {
    const Circle& c = cylinders[i];
    if (!(c.radius > 0.0)) throw MeshError("cylinder radius must be positive");
    const double margin = std::min({c.center.x(), 1.0 - c.center.x(), c.center.y(), 1.0 - c.center.y()});
    if (margin <= c.radius) throw MeshError("cylinder touches the square boundary");
    for (std::size_t j = 0; j < i; ++j)
      if ((c.center - cylinders[j].center).norm() <= c.radius + cylinders[j].radius)
        throw MeshError("cylinders overlap");
  }

  auto grid = [n](int i) { return static_cast<double>(i) / n; };

  // Grid rectangles, split through any cylinder center lying strictly inside.
  std::vector<Rect> rects;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const Box box{grid(i), grid(i + 1), grid(j), grid(j + 1)};
      std::vector<Box> parts{box};
      for (const auto& c : cylinders) {
        if (!box.contains_strictly(c.center)) continue;
        std::vector<Box> next;
        for (const auto& b : parts) {
          if (c.center.x() > b.x0 && c.center.x() < b.x1) {
            next.push_back({b.x0, c.center.x(), b.y0, b.y1});
            next.push_back({c.center.x(), b.x1, b.y0, b.y1});
          } else {
            next.push_back(b);
          }
        }
        parts = std::move(next);
      }
      for (const auto& b : parts) {
        int touching = -1, count = 0;
        bool covered = false;
        for (std::size_t ci = 0; ci < cylinders.size(); ++ci) {
          const Circle& c = cylinders[ci];
          if (distance_to_box(c.center, b) >= c.radius) continue;
          const double far = std::max({(Point2(b.x0, b.y0) - c.center).norm(), (Point2(b.x1, b.y0) - c.center).norm(),
                                       (Point2(b.x0, b.y1) - c.center).norm(), (Point2(b.x1, b.y1) - c.center).norm()});
          if (far < c.radius) covered = true;
          touching = static_cast<int>(ci);
          ++count;
        }
        if (covered) continue;
        if (count > 1) throw MeshError("more than one cylinder intersects a single cell");
        rects.push_back({b, touching});
      }
    }
  }

  // Breakpoints along horizontal and vertical lines from every rectangle corner.
  std::map<double, std::set<double>> on_horizontal, on_vertical;
  for (const auto& r : rects) {
    for (double y : {r.box.y0, r.box.y1}) {
      on_horizontal[y].insert(r.box.x0);
      on_horizontal[y].insert(r.box.x1);
    }
    for (double x : {r.box.x0, r.box.x1}) {
      on_vertical[x].insert(r.box.y0);
      on_vertical[x].insert(r.box.y1);
    }
  }

  Mesh mesh;
  mesh.cylinders = cylinders;
  mesh.subdivisions = n;
  std::map<PointKey, int> vertex_ids;
  std::map<std::pair<int, int>, int> segment_faces;
  auto vertex_id = [&](const Point2& p) {
    auto [it, inserted] = vertex_ids.emplace(PointKey{p.x(), p.y()}, static_cast<int>(vertex_ids.size()));
    return it->second;
  };

  const double cell_area = 1.0 / (static_cast<double>(n) * n);

  for (const auto& rect : rects) {
    const Box& b = rect.box;
    const Circle* circle = rect.cylinder >= 0 ? &cylinders[rect.cylinder] : nullptr;

    // Counter-clockwise sides: bottom, right, top, left.
    struct Side {
      bool horizontal;
      double fixed, from, to;
    };
    const Side sides[4] = {{true, b.y0, b.x0, b.x1}, {false, b.x1, b.y0, b.y1}, {true, b.y1, b.x1, b.x0},
                           {false, b.x0, b.y1, b.y0}};
    struct Sub {
      Point2 a, b;
      bool inside;
      bool a_is_hit;
    };
    std::vector<Sub> subs;
    std::vector<Point2> hits;
    for (const auto& s : sides) {
      const double lo = std::min(s.from, s.to), hi = std::max(s.from, s.to);
      std::vector<std::pair<double, bool>> params;
      const auto& known = s.horizontal ? on_horizontal[s.fixed] : on_vertical[s.fixed];
      for (double v : known)
        if (v > lo && v < hi) params.emplace_back(v, false);
      if (circle) {
        const auto h = s.horizontal ? circle_hits_horizontal(s.fixed, *circle, lo, hi)
                                    : circle_hits_vertical(s.fixed, *circle, lo, hi);
        for (double v : h) {
          if (std::abs(v - lo) < kDegenerateTol || std::abs(v - hi) < kDegenerateTol)
            throw MeshError("cylinder boundary passes through a grid vertex");
          for (const auto& [known_v, is_hit] : params)
            if (std::abs(v - known_v) < kDegenerateTol)
              throw MeshError("cylinder boundary passes through a grid vertex");
          params.emplace_back(v, true);
        }
      }
      std::sort(params.begin(), params.end());
      if (s.to < s.from) std::reverse(params.begin(), params.end());
      auto make_point = [&](double v) { return s.horizontal ? Point2(v, s.fixed) : Point2(s.fixed, v); };
      Point2 prev = make_point(s.from);
      bool prev_hit = false;
      for (const auto& [v, is_hit] : params) {
        const Point2 p = make_point(v);
        subs.push_back({prev, p, false, prev_hit});
        if (is_hit) hits.push_back(p);
        prev = p;
        prev_hit = is_hit;
      }
      subs.push_back({prev, make_point(s.to), false, prev_hit});
    }
    for (auto& s : subs)
      s.inside = circle && (0.5 * (s.a + s.b) - circle->center).norm() < circle->radius;

    // Assemble boundary loops.
    std::vector<std::vector<Piece>> loops;
    const std::size_t m = subs.size();
    std::vector<bool> used(m, false);
    for (std::size_t s0 = 0; s0 < m; ++s0) {
      if (subs[s0].inside || used[s0]) continue;
      std::vector<Piece> loop;
      std::size_t cur = s0;
      for (std::size_t guard = 0; guard < 4 * m + 4; ++guard) {
        used[cur] = true;
        loop.push_back({false, subs[cur].a, subs[cur].b, -1, 0.0, 0.0});
        std::size_t next = (cur + 1) % m;
        if (subs[next].inside) {
          // Follow the cylinder clockwise from the entry point to the next hit.
          const Point2 p = subs[cur].b;
          const double th_p = std::atan2(p.y() - circle->center.y(), p.x() - circle->center.x());
          double best = std::numeric_limits<double>::infinity();
          Point2 q = p;
          for (const auto& h : hits) {
            double d = th_p - std::atan2(h.y() - circle->center.y(), h.x() - circle->center.x());
            while (d <= 1e-14) d += 2.0 * pi;
            if (d < best) {
              best = d;
              q = h;
            }
          }
          loop.push_back({true, p, q, rect.cylinder, th_p, th_p - best});
          next = m;
          for (std::size_t k = 0; k < m; ++k)
            if (!subs[k].inside && subs[k].a_is_hit && subs[k].a == q) next = k;
          if (next == m) throw MeshError("could not close a cut-cell boundary loop");
        }
        if (next == s0) break;
        if (used[next]) throw MeshError("element not simply connected");
        cur = next;
      }
      loops.push_back(std::move(loop));
    }

    for (auto& loop : loops) {
      const LoopMoments mom = loop_moments(loop, cylinders);
      if (mom.area < min_area_fraction * cell_area)
        throw MeshError("cut cell below minimum area fraction");
      Element e;
      e.id = static_cast<int>(mesh.elements.size());
      e.area = mom.area;
      e.centroid = mom.first;
      e.cell = b;
      e.cut_cylinder = circle ? rect.cylinder : -1;
      std::vector<Point2> extremal;
      bool has_arc = false;
      for (const auto& p : loop) {
        e.vertices.push_back(p.a);
        extremal.push_back(p.a);
        if (!p.arc) {
          const int va = vertex_id(p.a), vb = vertex_id(p.b);
          const auto key = std::minmax(va, vb);
          auto it = segment_faces.find({key.first, key.second});
          if (it == segment_faces.end()) {
            Face f;
            f.id = static_cast<int>(mesh.faces.size());
            f.geometry = Segment{p.a, p.b};
            f.length = f.diameter = (p.b - p.a).norm();
            const bool on_square = (p.a.x() == 0.0 && p.b.x() == 0.0) || (p.a.x() == 1.0 && p.b.x() == 1.0) ||
                                   (p.a.y() == 0.0 && p.b.y() == 0.0) || (p.a.y() == 1.0 && p.b.y() == 1.0);
            f.kind = on_square ? BoundaryKind::square_boundary : BoundaryKind::internal;
            f.elements = {e.id, -1};
            segment_faces[{key.first, key.second}] = f.id;
            e.faces.push_back({f.id, +1});
            mesh.faces.push_back(std::move(f));
          } else {
            Face& f = mesh.faces[it->second];
            if (f.elements[1] >= 0) throw MeshError("face shared by more than two elements");
            f.elements[1] = e.id;
            e.faces.push_back({f.id, f.segment().a == p.a ? +1 : -1});
          }
        } else {
          has_arc = true;
          Face f;
          f.id = static_cast<int>(mesh.faces.size());
          const Circle& c = cylinders[p.cylinder];
          Arc arc{p.cylinder, c, p.to, p.from};
          f.geometry = arc;
          f.kind = BoundaryKind::cylinder_boundary;
          f.length = c.radius * (arc.theta1 - arc.theta0);
          f.diameter = (p.a - p.b).norm();
          if (arc.theta1 - arc.theta0 > pi) f.diameter = 2.0 * c.radius;
          f.elements = {e.id, -1};
          for (int q = -8; q <= 8; ++q) {
            const double th = q * 0.5 * pi;
            if (th > arc.theta0 && th < arc.theta1) extremal.push_back(arc.point(th));
          }
          e.faces.push_back({f.id, -1});
          mesh.faces.push_back(std::move(f));
        }
      }
      if (!has_arc) e.cut_cylinder = -1;
      for (std::size_t i = 0; i < extremal.size(); ++i)
        for (std::size_t j = i + 1; j < extremal.size(); ++j)
          e.diameter = std::max(e.diameter, (extremal[i] - extremal[j]).norm());
      mesh.h = std::max(mesh.h, e.diameter);
      mesh.elements.push_back(std::move(e));
    }
  }

  for (const auto& f : mesh.faces) {
    if (f.kind == BoundaryKind::internal && f.elements[1] < 0)
      throw MeshError("dangling face");
  }
  return mesh;
}

MeshDiagnostics validate_mesh(const Mesh& mesh) {
  MeshDiagnostics d;
  std::vector<std::vector<std::pair<int, int>>> owners(mesh.faces.size());
  const double cell_area = mesh.subdivisions > 0 ? 1.0 / (double(mesh.subdivisions) * mesh.subdivisions) : 1.0;
  d.min_chunkiness = std::numeric_limits<double>::infinity();
  d.max_chunkiness = 0.0;
  for (const auto& e : mesh.elements) {
    for (std::size_t i = 0; i < e.faces.size(); ++i) {
      const FaceRef& r = e.faces[i];
      if (r.face < 0 || r.face >= static_cast<int>(mesh.faces.size())) throw MeshError("dangling face");
      owners[r.face].emplace_back(e.id, r.orientation);
      const Face& f = mesh.faces[r.face];
      if (f.is_arc() && r.orientation != -1) throw MeshError("inconsistent orientation");
      const Face& g = mesh.faces[e.faces[(i + 1) % e.faces.size()].face];
      const int og = e.faces[(i + 1) % e.faces.size()].orientation;
      const Point2 end = r.orientation > 0 ? f.end() : f.start();
      const Point2 next_start = og > 0 ? g.start() : g.end();
      if ((end - next_start).norm() > 1e-10) {
        d.loops_closed = false;
        throw MeshError("inconsistent orientation");
      }
    }
    d.area_fraction.push_back(e.area / cell_area);
    d.total_area += e.area;

    // Distance from the centroid to the element boundary.
    double inradius = std::numeric_limits<double>::infinity();
    for (const auto& r : e.faces) {
      const Face& f = mesh.faces[r.face];
      double dist;
      if (f.is_arc()) {
        const Arc& a = f.arc();
        const Vector2 v = e.centroid - a.circle.center;
        double th = std::atan2(v.y(), v.x());
        while (th < a.theta0) th += 2.0 * pi;
        while (th > a.theta0 + 2.0 * pi) th -= 2.0 * pi;
        if (th <= a.theta1)
          dist = std::abs(v.norm() - a.circle.radius);
        else
          dist = std::min((e.centroid - f.start()).norm(), (e.centroid - f.end()).norm());
      } else {
        const Point2 a = f.segment().a, b = f.segment().b;
        const double t = std::clamp((e.centroid - a).dot(b - a) / (b - a).squaredNorm(), 0.0, 1.0);
        dist = (e.centroid - (a + t * (b - a))).norm();
      }
      inradius = std::min(inradius, dist);
    }
    const double chunk = mesh.contains(e, e.centroid) ? inradius / e.diameter : 0.0;
    d.chunkiness.push_back(chunk);
    d.min_chunkiness = std::min(d.min_chunkiness, chunk);
    d.max_chunkiness = std::max(d.max_chunkiness, chunk);
  }
  for (std::size_t fi = 0; fi < mesh.faces.size(); ++fi) {
    const Face& f = mesh.faces[fi];
    const auto& o = owners[fi];
    const std::size_t expected = f.is_boundary() ? 1 : 2;
    if (o.size() != expected) {
      d.adjacency_consistent = false;
      throw MeshError("dangling face");
    }
    if (expected == 2 && o[0].second != -o[1].second) {
      d.orientation_consistent = false;
      throw MeshError("inconsistent orientation");
    }
  }
  return d;
}

void write_mesh(const Mesh& mesh, std::ostream& os) {
  std::map<PointKey, int> ids;
  std::vector<Point2> vertices;
  auto vid = [&](const Point2& p) {
    auto [it, inserted] = ids.emplace(PointKey{p.x(), p.y()}, static_cast<int>(vertices.size()));
    if (inserted) vertices.push_back(p);
    return it->second;
  };
  for (const auto& f : mesh.faces) {
    vid(f.start());
    vid(f.end());
  }
  os.precision(17);
  os << "hho-mesh v1\n";
  os << "cylinders " << mesh.cylinders.size() << "\n";
  for (const auto& c : mesh.cylinders) os << c.center.x() << " " << c.center.y() << " " << c.radius << "\n";
  os << "vertices " << vertices.size() << "\n";
  for (const auto& v : vertices) os << v.x() << " " << v.y() << "\n";
  os << "faces " << mesh.faces.size() << "\n";
  for (const auto& f : mesh.faces) {
    os << f.id << " ";
    if (f.is_arc())
      os << "arc " << vid(f.start()) << " " << vid(f.end()) << " " << f.arc().cylinder << " " << f.arc().theta0 << " "
         << f.arc().theta1;
    else
      os << "segment " << vid(f.start()) << " " << vid(f.end());
    os << " " << to_string(f.kind) << "\n";
  }
  os << "elements " << mesh.elements.size() << "\n";
  for (const auto& e : mesh.elements) {
    os << e.id << " " << e.faces.size();
    for (const auto& r : e.faces) os << " " << r.face << " " << r.orientation;
    os << "\n";
  }
}

}  // namespace hho
