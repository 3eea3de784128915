#pragma once

#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace dpg {

using Point = Eigen::Vector2d;

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tagged boundary segment as it appears in the input (0-based vertex ids).
struct BoundarySegment {
  std::array<int, 2> v;
  int tag = 1;
};

/// Edge of the triangulation. `tag == 0` marks an interior edge.
///
/// The canonical normal points to the left of the tangent running from the
/// lower to the higher vertex index, i.e. the tangent rotated by +90 degrees.
struct Edge {
  std::array<int, 2> v;           // v[0] < v[1]
  int tag = 0;
  std::array<int, 2> tri{-1, -1}; // tri[1] == -1 on the boundary
  std::array<int, 2> local{-1, -1};
  Point normal = Point::Zero();
  double length = 0.0;

  bool is_boundary() const { return tri[1] < 0; }
};

/// Conforming triangulation of a polygonal domain.
///
/// Vertex indices are 0-based. Triangles are counterclockwise. Local edge k of
/// a triangle joins vertices (k+1)%3 and (k+2)%3, i.e. it is opposite vertex k.
class Triangulation {
 public:
  Triangulation() = default;
  Triangulation(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
                std::vector<BoundarySegment> boundary);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundarySegment>& boundary() const { return boundary_; }
  const std::vector<Edge>& edges() const { return edges_; }

  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  int num_boundary_edges() const;

  const Point& vertex(int i) const { return vertices_[i]; }
  std::array<Point, 3> corners(int t) const;

  /// Global edge index of local edge k of triangle t.
  int triangle_edge(int t, int k) const { return tri_edges_[t][k]; }
  /// +1 when the outward normal of t on local edge k equals the canonical normal.
  int edge_sign(int t, int k) const { return tri_signs_[t][k]; }

  double area(int t) const { return areas_[t]; }
  Point centroid(int t) const;
  double total_area() const;
  /// Diameter of the vertex bounding box.
  double bbox_diagonal() const;

  /// Triangles sharing an edge with t.
  std::vector<int> edge_neighbors(int t) const;
  /// Triangles sharing at least one vertex with t (excluding t).
  std::vector<int> vertex_neighbors(int t) const;
  /// For every vertex, the incident triangles in increasing order.
  std::vector<std::vector<int>> vertex_triangles() const;

 private:
  void build();

  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundarySegment> boundary_;
  std::vector<Edge> edges_;
  std::vector<std::array<int, 3>> tri_edges_;
  std::vector<std::array<int, 3>> tri_signs_;
  std::vector<double> areas_;
};

double signed_area(const Point& a, const Point& b, const Point& c);

/// Structured mesh of [x0,x1]x[y0,y1] with nx*ny cells split into two triangles
/// along the diagonal. Boundary tags: 1 bottom, 2 right, 3 top, 4 left.
Triangulation structured_rectangle(int nx, int ny, double x0 = 0.0, double x1 = 1.0,
                                   double y0 = 0.0, double y1 = 1.0);

/// L-shaped domain [-1,1]^2 minus (0,1]x[-1,0), built from three unit squares
/// each split into `n` x `n` cells of two triangles. Boundary tags run 1..6
/// counterclockwise starting at the bottom side y = -1.
Triangulation structured_lshape(int n = 2);

/// Splits every triangle into four at its edge midpoints; tags are inherited.
Triangulation refine_uniform(const Triangulation& mesh);

Triangulation read_mesh(const std::filesystem::path& path);
void write_mesh(const Triangulation& mesh, const std::filesystem::path& path);

}  // namespace dpg
