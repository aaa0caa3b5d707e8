// Conforming triangle meshes on axis-aligned rectangles [0,lx] x [0,ly].
//
// Triangles store their vertices counterclockwise with the convention that
// the refinement edge (newest-vertex bisection) is the edge (v0, v1); v2 is
// the peak. build_rect_mesh assigns the cell diagonal as refinement edge of
// both triangles of a cell, which makes the initial labeling compatible:
// recursive closure chains stay short and bisection of a right isosceles
// triangle always splits its hypotenuse.
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "chns/geometry.hpp"

namespace chns {

enum class BoundaryTag : std::uint8_t { interior = 0, left, right, bottom, top };

struct TriMesh {
  std::vector<Vec2> vertex;
  std::vector<std::array<int, 3>> tri; // CCW, refinement edge = (v0, v1)
  std::vector<int> tri_level;          // bisection generation, 0 on build

  // Derived connectivity, rebuilt after construction and refinement.
  std::vector<std::array<int, 2>> edge;     // vertex pairs, a < b
  std::vector<std::array<int, 2>> edge_tri; // adjacent triangles, -1 = none
  std::vector<std::array<int, 3>> tri_edge; // edge opposite local vertex k
  std::vector<BoundaryTag> edge_tag;        // interior for non-boundary edges

  double lx = 0.0;
  double ly = 0.0;

  int n_vertices() const { return static_cast<int>(vertex.size()); }
  int n_triangles() const { return static_cast<int>(tri.size()); }
  int n_edges() const { return static_cast<int>(edge.size()); }

  double tri_area(int t) const;     // positive for CCW triangles
  double tri_diameter(int t) const; // longest edge
  Vec2 tri_centroid(int t) const;
};

// Structured mesh: nx*ny cells, each cut once along the lower-left to
// upper-right diagonal. (nx+1)*(ny+1) vertices, 2*nx*ny triangles.
TriMesh build_rect_mesh(int nx, int ny, double lx, double ly);

struct RefineResult {
  TriMesh mesh;
  // For every new triangle, the index of the ancestor triangle in the input
  // mesh that contains it. Identity for triangles the call left untouched.
  std::vector<int> parent;
};

// Newest-vertex bisection of all marked triangles plus the conformity
// closure. Refine-only; the result has no hanging nodes.
RefineResult refine(const TriMesh& mesh, const std::vector<std::uint8_t>& marks);

// Marks triangle t iff |grad phi|_T * diam(T) > threshold and
// tri_level[t] < max_level. phi is a P1 coefficient vector over vertices.
std::vector<std::uint8_t> mark_by_gradient(const TriMesh& mesh,
                                           const std::vector<double>& phi,
                                           double threshold, int max_level);

} // namespace chns
