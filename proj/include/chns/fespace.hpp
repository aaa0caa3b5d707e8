// Lagrange spaces on TriMesh for the Taylor-Hood (2,1) discretization:
// scalar P1 over vertices (phase field, potential, pressure, concentration)
// and vector P2 over vertices+edge midpoints (velocity, two interleaved
// components per node). Coefficient vectors are plain std::vector<double>.
#pragma once

#include <array>
#include <functional>
#include <vector>

#include "chns/geometry.hpp"
#include "chns/mesh.hpp"

namespace chns {

// Symmetric rule on the reference triangle, positive weights summing to the
// reference area 1/2. Exact at least to the requested polynomial degree.
struct QuadratureRule {
  int degree = 0;
  std::vector<std::array<double, 3>> bary;
  std::vector<double> weight;
  int size() const { return static_cast<int>(weight.size()); }
};

// Degrees 1..6 are served; rules are cached singletons.
const QuadratureRule& quadrature(int degree);

// Per-triangle affine geometry: barycentric gradients and area.
struct TriGeom {
  std::array<Vec2, 3> grad_lambda;
  double area = 0.0;
};
TriGeom tri_geom(const TriMesh& mesh, int t);

struct ScalarSpaceP1 {
  const TriMesh* mesh = nullptr;
  int n_dofs() const { return mesh->n_vertices(); }
  std::array<int, 3> cell_dofs(int t) const { return mesh->tri[t]; }
  Vec2 dof_coord(int dof) const { return mesh->vertex[dof]; }
};

struct VectorSpaceP2 {
  const TriMesh* mesh = nullptr;
  // Scalar nodes: vertices first, then one node per edge midpoint.
  int n_nodes() const { return mesh->n_vertices() + mesh->n_edges(); }
  int n_dofs() const { return 2 * n_nodes(); }
  // Node k of triangle t; k in 0..2 vertices, 3..5 midpoint of edge
  // opposite vertex k-3.
  std::array<int, 6> cell_nodes(int t) const;
  Vec2 node_coord(int node) const;
  // Interleaved layout: dof = 2*node + component.
  static int dof_of(int node, int comp) { return 2 * node + comp; }
};

ScalarSpaceP1 build_p1(const TriMesh& mesh);
VectorSpaceP2 build_p2vec(const TriMesh& mesh);

// P2 shape values / barycentric-space derivative factors at a barycentric
// point; gradients come out as sum_k dshape[i][k] * grad_lambda[k].
void p2_shapes(const std::array<double, 3>& lam, std::array<double, 6>& val);
void p2_shape_derivs(const std::array<double, 3>& lam,
                     std::array<std::array<double, 3>, 6>& dval);

// Pointwise field evaluation by brute-force location; throws
// std::domain_error when x lies outside the mesh.
double evaluate(const ScalarSpaceP1& s, const std::vector<double>& u, Vec2 x);
Vec2 evaluate(const VectorSpaceP2& s, const std::vector<double>& u, Vec2 x);

std::vector<double> interpolate(const ScalarSpaceP1& s,
                                const std::function<double(Vec2)>& f);
std::vector<double> interpolate(const VectorSpaceP2& s,
                                const std::function<Vec2(Vec2)>& f);

// Integral of a P1 field (exact) and the mesh measure.
double integrate(const ScalarSpaceP1& s, const std::vector<double>& u);
double mesh_measure(const TriMesh& mesh);

// Subtracts the mean so the result integrates to zero; returns the mean.
double zero_mean_project(const ScalarSpaceP1& s, std::vector<double>& u);

// L2 norm over the mesh via quadrature (degree 5, same rule as assembly).
double l2_norm(const ScalarSpaceP1& s, const std::vector<double>& u);
double l2_norm(const VectorSpaceP2& s, const std::vector<double>& u);

// Nodal interpolation of an old-mesh field onto the refinement of its mesh;
// parent is the ancestor map produced by refine(). Exact for functions the
// old space contains.
std::vector<double> transfer(const ScalarSpaceP1& old_s,
                             const std::vector<double>& u_old,
                             const ScalarSpaceP1& new_s,
                             const std::vector<int>& parent);
std::vector<double> transfer(const VectorSpaceP2& old_s,
                             const std::vector<double>& u_old,
                             const VectorSpaceP2& new_s,
                             const std::vector<int>& parent);

// Boundary scalar nodes with their outline tags; corner vertices appear once
// per incident tagged edge. P1 listing covers vertices only, P2 listing
// vertices and midpoints of boundary edges.
struct BoundaryNode {
  int node = -1;
  BoundaryTag tag = BoundaryTag::interior;
  Vec2 coord;
};
std::vector<BoundaryNode> boundary_nodes_p1(const TriMesh& mesh);
std::vector<BoundaryNode> boundary_nodes_p2(const TriMesh& mesh);

} // namespace chns
