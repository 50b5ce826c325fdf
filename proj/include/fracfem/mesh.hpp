#pragma once

#include "fracfem/common.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace fracfem {

enum class DomainKind { unit_square, l_shape, imported };

struct DomainSpec {
  DomainKind kind = DomainKind::unit_square;

  // pi / interior angle of the reentrant corner, 1 for convex domains
  double reentrant_exponent() const { return kind == DomainKind::l_shape ? 2.0 / 3.0 : 1.0; }
  double area() const;
};

const char* to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

struct Edge {
  std::array<int, 2> v{};            // v[0] < v[1]
  std::array<int, 2> tri{-1, -1};    // tri[0] < tri[1]; tri[1] == -1 on the boundary
  std::array<int, 2> local{-1, -1};  // local edge index in tri[0], tri[1]
  bool boundary() const { return tri[1] < 0; }
};

// Conforming triangulation. Local edge k of a triangle is opposite its local vertex k.
class Mesh {
 public:
  Mesh() = default;
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles, DomainSpec domain = {});

  static Mesh structured(DomainSpec domain, int n_divisions);
  static Mesh unit_square(int n) { return structured({DomainKind::unit_square}, n); }
  static Mesh l_shape(int n) { return structured({DomainKind::l_shape}, n); }

  Mesh refine_uniform() const;

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  const Point& vertex(int i) const { return vertices_[i]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::array<int, 3>& triangle(int t) const { return triangles_[t]; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::array<int, 3>& triangle_edges(int t) const { return triangle_edges_[t]; }

  bool vertex_on_boundary(int v) const { return boundary_vertex_[v] != 0; }
  bool edge_on_boundary(int e) const { return edges_[e].boundary(); }
  int num_boundary_vertices() const;
  int num_interior_vertices() const { return num_vertices() - num_boundary_vertices(); }
  int num_interior_edges() const;

  const DomainSpec& domain() const { return domain_; }
  int divisions() const { return divisions_; }
  int refinement_level() const { return refinement_level_; }

  std::array<Point, 3> corners(int t) const;
  double signed_area(int t) const;
  double area(int t) const { return signed_area(t); }
  Point centroid(int t) const;
  double diameter(int t) const;
  Point edge_midpoint(int e) const;
  double edge_length(int e) const;
  // gradients of the barycentric coordinates, constant on the triangle
  std::array<Point, 3> barycentric_gradients(int t) const;
  Point map(int t, const std::array<double, 3>& bary) const;

  double mesh_size() const { return mesh_size_; }
  double total_area() const;
  double min_angle() const;
  // max over triangles of circumradius / inradius
  double shape_regularity() const;

  // lineage of uniform refinement: every vertex is the midpoint of two parent vertices
  // (equal indices for inherited vertices); empty for meshes not produced by refinement
  const std::vector<std::array<int, 2>>& vertex_parents() const { return vertex_parents_; }
  const std::vector<int>& triangle_parent() const { return triangle_parent_; }

  // throws InvalidParameter describing the first violated invariant
  void validate() const;

  void write(std::ostream& os) const;
  static Mesh read(std::istream& is);

 private:
  void build_topology();

  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<char> boundary_vertex_;
  std::vector<std::array<int, 2>> vertex_parents_;
  std::vector<int> triangle_parent_;
  DomainSpec domain_{};
  int divisions_ = 0;
  int refinement_level_ = 0;
  double mesh_size_ = 0.0;
};

// Nodal values on a refined mesh from nodal values on its parent (P1 prolongation).
Vector prolongate_nodal(const Mesh& fine, const Vector& coarse_values);

}  // namespace fracfem
