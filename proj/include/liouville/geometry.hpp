#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "liouville/errors.hpp"

namespace liouville {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(const Vec2& o) const { return x * o.x + y * o.y; }
  double cross(const Vec2& o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

inline double dist(const Vec2& a, const Vec2& b) { return (a - b).norm(); }

/// One real value per mesh vertex.
using VertexField = Eigen::VectorXd;
/// One real value per boundary vertex, ordered as TriangleMesh::boundary_order.
using BoundaryField = Eigen::VectorXd;

/// Planar triangulated domain with oriented boundary loops.
///
/// All triangles are positively oriented. Boundary loops are ordered cycles of
/// vertex indices, one per boundary component, and together they visit every
/// boundary vertex exactly once. The mesh is immutable once built; builders
/// call finalize() which derives flags, loops and the boundary ordering.
struct TriangleMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::vector<int>> boundary_loops;
  std::vector<char> vertex_is_boundary;

  // Derived by finalize(): boundary vertices loop by loop, and the inverse map
  // (-1 for interior vertices).
  std::vector<int> boundary_order;
  std::vector<int> vertex_to_boundary;

  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }
  int num_boundary_vertices() const { return static_cast<int>(boundary_order.size()); }
  int num_loops() const { return static_cast<int>(boundary_loops.size()); }

  double triangle_area(int t) const {
    const auto& tri = triangles[t];
    Vec2 e1 = vertices[tri[1]] - vertices[tri[0]];
    Vec2 e2 = vertices[tri[2]] - vertices[tri[0]];
    return 0.5 * e1.cross(e2);
  }

  double total_area() const;
  double loop_length(int loop) const;
  double max_edge_length() const;
  /// Length of the shortest edge incident to vertex v.
  double local_edge_length(int v) const;
  /// Index of the mesh vertex closest to p (restricted to boundary vertices if
  /// boundary_only is set).
  int nearest_vertex(const Vec2& p, bool boundary_only = false) const;

  /// Derives vertex flags, traces boundary loops and builds the boundary
  /// ordering. Throws NumericalError if the triangulation is not an oriented
  /// manifold with boundary.
  void finalize();

  /// Checks all structural invariants (orientation, edge manifoldness, loop
  /// partition). Throws NumericalError on the first violation.
  void validate() const;
};

/// V - E + F.
int euler_characteristic(const TriangleMesh& mesh);

/// Piecewise-linear quadrature of a vertex field: sum over triangles of
/// area * (f_i + f_j + f_k) / 3. Linear in the field; integrate(1) is exactly
/// the total area.
double integrate(const VertexField& field, const TriangleMesh& mesh);

/// Trapezoid quadrature over boundary edges. loop = -1 integrates over the
/// whole boundary, otherwise over a single loop (out of range throws).
double boundary_integrate(const BoundaryField& field, const TriangleMesh& mesh, int loop = -1);

/// Lumped vertex areas (row sums of the consistent mass matrix).
Eigen::VectorXd lumped_vertex_areas(const TriangleMesh& mesh);
/// Lumped boundary lengths per boundary vertex (boundary_order indexing).
Eigen::VectorXd lumped_boundary_lengths(const TriangleMesh& mesh);

/// Lift a boundary field to a full vertex field (zero on interior vertices).
VertexField lift_boundary_field(const BoundaryField& field, const TriangleMesh& mesh);
/// Restrict a vertex field to the boundary ordering.
BoundaryField restrict_to_boundary(const VertexField& field, const TriangleMesh& mesh);

/// Options shared by the disc/annulus builders.
///
/// include_points are snapped onto the nearest mesh vertex (exactly); each one
/// also receives geometric local refinement with edge target
/// max(grade_h_min, grade_ratio * distance). The defaults realize three extra
/// grading rings relative to the base edge length.
struct MeshBuildOptions {
  std::vector<Vec2> include_points;
  double grade_h_min = -1.0;   // <0: 1/8 of the base edge length
  double grade_ratio = 0.5;
  int symmetry_order = 1;      // ring sizes stay divisible by this
};

/// Structured disc mesh of the given radius. refinement >= 0 uniform
/// refinements of a 19-vertex base, boundary vertices on the exact circle.
TriangleMesh build_disc_mesh(double radius, int refinement, const MeshBuildOptions& opts = {});

/// Structured annulus mesh, two boundary loops (loop 0 outer, loop 1 inner).
TriangleMesh build_annulus_mesh(double r_in, double r_out, int refinement,
                                const MeshBuildOptions& opts = {});

/// Uniform midpoint refinement (every triangle into four). Boundary midpoints
/// are projected with `project` when given (signature: loop id, midpoint).
TriangleMesh uniform_refine(
    const TriangleMesh& mesh,
    const std::function<Vec2(int, const Vec2&)>& project = nullptr);

/// Conforming longest-edge bisection toward `p` until every triangle within
/// `radius` of p has longest edge <= max(h_min, ratio * distance(tri, p)).
void refine_toward(TriangleMesh& mesh, const Vec2& p, double h_min, double ratio, double radius,
                   const std::function<Vec2(int, const Vec2&)>& project = nullptr);

/// Removes all triangles whose centroid lies in the open disc, creating a new
/// boundary loop. The hole must be well inside the mesh.
TriangleMesh punch_hole(const TriangleMesh& mesh, const Vec2& center, double radius);

/// Applies a vertex relabeling permutation (new_index = perm[old_index]).
TriangleMesh relabel_vertices(const TriangleMesh& mesh, const std::vector<int>& perm);

/// MESH2D v1 text format.
void write_mesh2d(const TriangleMesh& mesh, const std::string& path);
TriangleMesh read_mesh2d(const std::string& path);

}  // namespace liouville
