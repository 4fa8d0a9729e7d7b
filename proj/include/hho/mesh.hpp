#pragma once

// Curved 2D meshes of the unit square with circular cylinders cut out.
//
// Faces are straight segments or circular arcs. Each element stores its
// boundary loop as an ordered list of (face, orientation) pairs; the
// orientation flips the face's stored normal so that it points out of the
// element. Stored normals are:
//   segment a->b : the tangent (b - a) rotated clockwise, i.e. (dy, -dx)/|b-a|
//   arc          : (x - c)/R, pointing away from the cylinder center
// Elements lie outside every cylinder, so arc faces always carry
// orientation -1.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "hho/geometry.hpp"

namespace hho {

struct Segment {
  Point2 a, b;
};

/// Arc of a cylinder, parametrised counter-clockwise by angle in [theta0, theta1].
struct Arc {
  int cylinder{-1};
  Circle circle;
  double theta0{0.0}, theta1{0.0};

  Point2 point(double theta) const { return circle.center + circle.radius * unit_direction(theta); }
};

enum class BoundaryKind { internal, square_boundary, cylinder_boundary };

std::string to_string(BoundaryKind kind);

struct Face {
  int id{-1};
  std::variant<Segment, Arc> geometry;
  BoundaryKind kind{BoundaryKind::internal};
  double diameter{0.0};
  double length{0.0};
  std::array<int, 2> elements{-1, -1};

  bool is_arc() const { return std::holds_alternative<Arc>(geometry); }
  bool is_boundary() const { return kind != BoundaryKind::internal; }
  const Segment& segment() const { return std::get<Segment>(geometry); }
  const Arc& arc() const { return std::get<Arc>(geometry); }

  /// Stored unit normal at a point of the face.
  Vector2 normal_at(const Point2& x) const;
  /// Start/end points in the face's own parametrisation.
  Point2 start() const;
  Point2 end() const;
};

struct FaceRef {
  int face{-1};
  int orientation{+1};
};

struct Element {
  int id{-1};
  std::vector<FaceRef> faces;
  /// Loop vertices in counter-clockwise order (start point of each face traversal).
  std::vector<Point2> vertices;
  Point2 centroid{0.0, 0.0};
  double diameter{0.0};
  double area{0.0};
  /// Grid rectangle the element was cut from.
  Box cell;
  /// Cylinder cutting this element, or -1 for an uncut rectangle.
  int cut_cylinder{-1};

  bool is_cut() const { return cut_cylinder >= 0; }
};

struct Mesh {
  std::vector<Element> elements;
  std::vector<Face> faces;
  std::vector<Circle> cylinders;
  int subdivisions{0};
  double h{0.0};

  std::size_t num_internal_faces() const;
  /// Outward normal of element `element` on face `ref` at point x.
  Vector2 outward_normal(const FaceRef& ref, const Point2& x) const {
    return static_cast<double>(ref.orientation) * faces[ref.face].normal_at(x);
  }
  /// Index of the element containing p, if any.
  std::optional<int> locate(const Point2& p) const;
  /// Exact point-in-element test (boundary loops may contain arcs).
  bool contains(const Element& element, const Point2& p) const;
};

/// Uniform n x n grid over (0,1)^2 with the given cylinders removed.
///
/// Cells cut by a cylinder boundary become curved elements; a cell containing a
/// cylinder center strictly inside is first split by the vertical line through
/// that center so that every element stays simply connected. Cut cells whose
/// area fraction falls below `min_area_fraction` are rejected.
Mesh build_cartesian_cut_mesh(int n, const std::vector<Circle>& cylinders,
                              double min_area_fraction = 1e-8);

struct MeshDiagnostics {
  std::vector<double> area_fraction;
  std::vector<double> chunkiness;
  double min_chunkiness{0.0};
  double max_chunkiness{0.0};
  double total_area{0.0};
  bool loops_closed{true};
  bool orientation_consistent{true};
  bool adjacency_consistent{true};
};

/// Checks topology and reports shape statistics. Throws MeshError on
/// "dangling face" or "inconsistent orientation".
MeshDiagnostics validate_mesh(const Mesh& mesh);

/// Writes the `hho-mesh v1` text format.
void write_mesh(const Mesh& mesh, std::ostream& os);

}  // namespace hho
