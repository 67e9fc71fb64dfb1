#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <vector>

namespace stochns {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Triangle index plus barycentric coordinates with respect to its vertices.
struct Location {
  int triangle = -1;
  std::array<double, 3> bary{};
};

/// Uniform triangulation of the unit square (0,1)^2.
///
/// Vertex (i, j) sits at (i/n, j/n) and has index j*(n+1) + i. Every cell is
/// split along its lower-left to upper-right diagonal into a lower triangle
/// (v00, v10, v11) and an upper triangle (v00, v11, v01), both counterclockwise.
/// Cell (i, j) owns triangles 2*(j*n + i) and 2*(j*n + i) + 1.
///
/// Local edge e of a triangle is the edge opposite its local vertex e.
/// The reported mesh size is h = 1/n (cell side); the triangle diameter is
/// sqrt(2)/n.
class Mesh {
 public:
  int subdivisions() const { return n_; }
  double h() const { return 1.0 / n_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<std::array<int, 2>>& edges() const { return edges_; }
  const std::vector<std::array<int, 3>>& triangle_edges() const { return triangle_edges_; }
  const std::vector<bool>& boundary_vertex() const { return boundary_vertex_; }
  const std::vector<bool>& boundary_edge() const { return boundary_edge_; }

  Point edge_midpoint(int e) const;
  double signed_area(int t) const;

  /// Finds the triangle containing x and its barycentric coordinates.
  /// Points on shared edges resolve to the triangle of the cell that owns them.
  /// Throws std::out_of_range for points outside the closed unit square.
  Location locate(Point x) const;

  /// Debug dump: "v index x y" lines followed by "t index v0 v1 v2" lines.
  void write_text(std::ostream& os) const;

 private:
  friend Mesh build_uniform_mesh(int n);

  int n_ = 0;
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<int, 3>> triangle_edges_;
  std::vector<bool> boundary_vertex_;
  std::vector<bool> boundary_edge_;
};

/// Throws std::invalid_argument for n < 1.
Mesh build_uniform_mesh(int n);

}  // namespace stochns
