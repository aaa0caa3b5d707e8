#include "chns/fespace.hpp"

#include <cmath>
#include <stdexcept>

namespace chns {

namespace {

void push_orbit3(QuadratureRule& r, double a, double w) {
  const double c = 1.0 - 2.0 * a;
  r.bary.push_back({c, a, a});
  r.bary.push_back({a, c, a});
  r.bary.push_back({a, a, c});
  r.weight.insert(r.weight.end(), 3, w);
}

void push_orbit6(QuadratureRule& r, double a, double b, double w) {
  const double c = 1.0 - a - b;
  r.bary.push_back({a, b, c});
  r.bary.push_back({a, c, b});
  r.bary.push_back({b, a, c});
  r.bary.push_back({b, c, a});
  r.bary.push_back({c, a, b});
  r.bary.push_back({c, b, a});
  r.weight.insert(r.weight.end(), 6, w);
}

// Weights below follow the unit-sum convention of the classical symmetric
// triangle tables; they are rescaled so the rule integrates constants over
// the reference triangle (area 1/2) exactly.
QuadratureRule make_rule(int degree) {
  QuadratureRule r;
  r.degree = degree;
  switch (degree) {
    case 1:
      r.bary.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      r.weight.push_back(1.0);
      break;
    case 2:
      push_orbit3(r, 1.0 / 6.0, 1.0 / 3.0);
      break;
    case 3:
    case 4:
      push_orbit3(r, 0.44594849091596488631832925388305,
                  0.22338158967801146569500700843312);
      push_orbit3(r, 0.09157621350977074345957146340220,
                  0.10995174365532186763832632490021);
      break;
    case 5: {
      const double s15 = std::sqrt(15.0);
      r.bary.push_back({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0});
      r.weight.push_back(9.0 / 40.0);
      push_orbit3(r, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
      push_orbit3(r, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
      break;
    }
    case 6:
      push_orbit3(r, 0.24928674517091042129163855310702,
                  0.11678627572637936602528961138558);
      push_orbit3(r, 0.06308901449150222834033160287082,
                  0.05084490637020681692093680910686);
      push_orbit6(r, 0.31035245103378440541660773395655,
                  0.05314504984481694735324967163139,
                  0.08285107561837357519355345642044);
      break;
    default:
      throw std::invalid_argument("quadrature: degree must be in 1..6");
  }
  double sum = 0.0;
  for (double w : r.weight) sum += w;
  const double scale = 0.5 / sum;
  for (double& w : r.weight) w *= scale;
  return r;
}

} // namespace

const QuadratureRule& quadrature(int degree) {
  static const QuadratureRule rules[6] = {make_rule(1), make_rule(2),
                                          make_rule(3), make_rule(4),
                                          make_rule(5), make_rule(6)};
  if (degree < 1 || degree > 6)
    throw std::invalid_argument("quadrature: degree must be in 1..6");
  return rules[degree - 1];
}

TriGeom tri_geom(const TriMesh& mesh, int t) {
  const auto& v = mesh.tri[t];
  const Vec2 p0 = mesh.vertex[v[0]], p1 = mesh.vertex[v[1]], p2 = mesh.vertex[v[2]];
  const double a2 = cross(p1 - p0, p2 - p0); // twice the signed area
  TriGeom g;
  g.area = 0.5 * a2;
  g.grad_lambda[0] = {(p1.y - p2.y) / a2, (p2.x - p1.x) / a2};
  g.grad_lambda[1] = {(p2.y - p0.y) / a2, (p0.x - p2.x) / a2};
  g.grad_lambda[2] = {(p0.y - p1.y) / a2, (p1.x - p0.x) / a2};
  return g;
}

std::array<int, 6> VectorSpaceP2::cell_nodes(int t) const {
  const auto& v = mesh->tri[t];
  const auto& e = mesh->tri_edge[t];
  const int nv = mesh->n_vertices();
  return {v[0], v[1], v[2], nv + e[0], nv + e[1], nv + e[2]};
}

Vec2 VectorSpaceP2::node_coord(int node) const {
  const int nv = mesh->n_vertices();
  if (node < nv) return mesh->vertex[node];
  const auto& e = mesh->edge[node - nv];
  return 0.5 * (mesh->vertex[e[0]] + mesh->vertex[e[1]]);
}

ScalarSpaceP1 build_p1(const TriMesh& mesh) { return {&mesh}; }
VectorSpaceP2 build_p2vec(const TriMesh& mesh) { return {&mesh}; }

void p2_shapes(const std::array<double, 3>& lam, std::array<double, 6>& val) {
  for (int k = 0; k < 3; ++k) val[k] = lam[k] * (2.0 * lam[k] - 1.0);
  val[3] = 4.0 * lam[1] * lam[2];
  val[4] = 4.0 * lam[2] * lam[0];
  val[5] = 4.0 * lam[0] * lam[1];
}

void p2_shape_derivs(const std::array<double, 3>& lam,
                     std::array<std::array<double, 3>, 6>& dval) {
  for (auto& row : dval) row = {0.0, 0.0, 0.0};
  for (int k = 0; k < 3; ++k) dval[k][k] = 4.0 * lam[k] - 1.0;
  dval[3][1] = 4.0 * lam[2];
  dval[3][2] = 4.0 * lam[1];
  dval[4][2] = 4.0 * lam[0];
  dval[4][0] = 4.0 * lam[2];
  dval[5][0] = 4.0 * lam[1];
  dval[5][1] = 4.0 * lam[0];
}

namespace {

// Barycentric coordinates of x in triangle t; returns false when x lies
// outside beyond the tolerance.
bool locate_in(const TriMesh& mesh, int t, Vec2 x, std::array<double, 3>& lam) {
  const auto& v = mesh.tri[t];
  const Vec2 p0 = mesh.vertex[v[0]], p1 = mesh.vertex[v[1]], p2 = mesh.vertex[v[2]];
  const double a2 = cross(p1 - p0, p2 - p0);
  lam[0] = cross(p1 - x, p2 - x) / a2;
  lam[1] = cross(p2 - x, p0 - x) / a2;
  lam[2] = cross(p0 - x, p1 - x) / a2;
  const double tol = 1e-12;
  return lam[0] >= -tol && lam[1] >= -tol && lam[2] >= -tol;
}

int locate(const TriMesh& mesh, Vec2 x, std::array<double, 3>& lam) {
  for (int t = 0; t < mesh.n_triangles(); ++t)
    if (locate_in(mesh, t, x, lam)) return t;
  throw std::domain_error("evaluate: point outside the mesh");
}

void clamp_bary(std::array<double, 3>& lam) {
  double sum = 0.0;
  for (double& l : lam) {
    if (l < 0.0) l = 0.0;
    sum += l;
  }
  for (double& l : lam) l /= sum;
}

} // namespace

double evaluate(const ScalarSpaceP1& s, const std::vector<double>& u, Vec2 x) {
  std::array<double, 3> lam;
  const int t = locate(*s.mesh, x, lam);
  clamp_bary(lam);
  const auto d = s.cell_dofs(t);
  return lam[0] * u[d[0]] + lam[1] * u[d[1]] + lam[2] * u[d[2]];
}

Vec2 evaluate(const VectorSpaceP2& s, const std::vector<double>& u, Vec2 x) {
  std::array<double, 3> lam;
  const int t = locate(*s.mesh, x, lam);
  clamp_bary(lam);
  std::array<double, 6> n;
  p2_shapes(lam, n);
  const auto nodes = s.cell_nodes(t);
  Vec2 val;
  for (int i = 0; i < 6; ++i) {
    val.x += n[i] * u[VectorSpaceP2::dof_of(nodes[i], 0)];
    val.y += n[i] * u[VectorSpaceP2::dof_of(nodes[i], 1)];
  }
  return val;
}

std::vector<double> interpolate(const ScalarSpaceP1& s,
                                const std::function<double(Vec2)>& f) {
  std::vector<double> u(s.n_dofs());
  for (int i = 0; i < s.n_dofs(); ++i) u[i] = f(s.dof_coord(i));
  return u;
}

std::vector<double> interpolate(const VectorSpaceP2& s,
                                const std::function<Vec2(Vec2)>& f) {
  std::vector<double> u(s.n_dofs());
  for (int n = 0; n < s.n_nodes(); ++n) {
    const Vec2 v = f(s.node_coord(n));
    u[VectorSpaceP2::dof_of(n, 0)] = v.x;
    u[VectorSpaceP2::dof_of(n, 1)] = v.y;
  }
  return u;
}

double integrate(const ScalarSpaceP1& s, const std::vector<double>& u) {
  double sum = 0.0;
  for (int t = 0; t < s.mesh->n_triangles(); ++t) {
    const auto d = s.cell_dofs(t);
    sum += s.mesh->tri_area(t) * (u[d[0]] + u[d[1]] + u[d[2]]) / 3.0;
  }
  return sum;
}

double mesh_measure(const TriMesh& mesh) {
  double a = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) a += mesh.tri_area(t);
  return a;
}

double zero_mean_project(const ScalarSpaceP1& s, std::vector<double>& u) {
  const double mean = integrate(s, u) / mesh_measure(*s.mesh);
  for (double& v : u) v -= mean;
  return mean;
}

double l2_norm(const ScalarSpaceP1& s, const std::vector<double>& u) {
  const auto& q = quadrature(5);
  double acc = 0.0;
  for (int t = 0; t < s.mesh->n_triangles(); ++t) {
    const double jac = 2.0 * s.mesh->tri_area(t);
    const auto d = s.cell_dofs(t);
    for (int k = 0; k < q.size(); ++k) {
      const auto& lam = q.bary[k];
      const double v = lam[0] * u[d[0]] + lam[1] * u[d[1]] + lam[2] * u[d[2]];
      acc += q.weight[k] * jac * v * v;
    }
  }
  return std::sqrt(acc);
}

double l2_norm(const VectorSpaceP2& s, const std::vector<double>& u) {
  const auto& q = quadrature(5);
  double acc = 0.0;
  std::array<double, 6> n;
  for (int t = 0; t < s.mesh->n_triangles(); ++t) {
    const double jac = 2.0 * s.mesh->tri_area(t);
    const auto nodes = s.cell_nodes(t);
    for (int k = 0; k < q.size(); ++k) {
      p2_shapes(q.bary[k], n);
      Vec2 v;
      for (int i = 0; i < 6; ++i) {
        v.x += n[i] * u[VectorSpaceP2::dof_of(nodes[i], 0)];
        v.y += n[i] * u[VectorSpaceP2::dof_of(nodes[i], 1)];
      }
      acc += q.weight[k] * jac * dot(v, v);
    }
  }
  return std::sqrt(acc);
}

namespace {

// Evaluates the old field at x, which is known to lie inside old triangle t.
double eval_p1_in(const ScalarSpaceP1& s, const std::vector<double>& u, int t,
                  Vec2 x) {
  std::array<double, 3> lam;
  locate_in(*s.mesh, t, x, lam);
  clamp_bary(lam);
  const auto d = s.cell_dofs(t);
  return lam[0] * u[d[0]] + lam[1] * u[d[1]] + lam[2] * u[d[2]];
}

Vec2 eval_p2_in(const VectorSpaceP2& s, const std::vector<double>& u, int t,
                Vec2 x) {
  std::array<double, 3> lam;
  locate_in(*s.mesh, t, x, lam);
  clamp_bary(lam);
  std::array<double, 6> n;
  p2_shapes(lam, n);
  const auto nodes = s.cell_nodes(t);
  Vec2 val;
  for (int i = 0; i < 6; ++i) {
    val.x += n[i] * u[VectorSpaceP2::dof_of(nodes[i], 0)];
    val.y += n[i] * u[VectorSpaceP2::dof_of(nodes[i], 1)];
  }
  return val;
}

// For every scalar node of the new mesh, an ancestor triangle of the old
// mesh whose closure contains the node. with_midpoints extends the listing
// from vertices to vertex+edge nodes (P2 layout).
std::vector<int> node_ancestors(const TriMesh& new_mesh,
                                const std::vector<int>& parent,
                                bool with_midpoints) {
  if (parent.size() != new_mesh.tri.size())
    throw std::invalid_argument("transfer: parent map does not match the mesh");
  const int nv = new_mesh.n_vertices();
  const int total = with_midpoints ? nv + new_mesh.n_edges() : nv;
  std::vector<int> anc(total, -1);
  for (int t = 0; t < new_mesh.n_triangles(); ++t) {
    for (int k = 0; k < 3; ++k) {
      anc[new_mesh.tri[t][k]] = parent[t];
      if (with_midpoints) anc[nv + new_mesh.tri_edge[t][k]] = parent[t];
    }
  }
  return anc;
}

} // namespace

std::vector<double> transfer(const ScalarSpaceP1& old_s,
                             const std::vector<double>& u_old,
                             const ScalarSpaceP1& new_s,
                             const std::vector<int>& parent) {
  const auto anc = node_ancestors(*new_s.mesh, parent, false);
  std::vector<double> u(new_s.n_dofs());
  for (int i = 0; i < new_s.n_dofs(); ++i)
    u[i] = eval_p1_in(old_s, u_old, anc[i], new_s.dof_coord(i));
  return u;
}

std::vector<double> transfer(const VectorSpaceP2& old_s,
                             const std::vector<double>& u_old,
                             const VectorSpaceP2& new_s,
                             const std::vector<int>& parent) {
  const auto anc = node_ancestors(*new_s.mesh, parent, true);
  std::vector<double> u(new_s.n_dofs());
  for (int n = 0; n < new_s.n_nodes(); ++n) {
    const Vec2 v = eval_p2_in(old_s, u_old, anc[n], new_s.node_coord(n));
    u[VectorSpaceP2::dof_of(n, 0)] = v.x;
    u[VectorSpaceP2::dof_of(n, 1)] = v.y;
  }
  return u;
}

std::vector<BoundaryNode> boundary_nodes_p1(const TriMesh& mesh) {
  std::vector<BoundaryNode> out;
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (mesh.edge_tag[e] == BoundaryTag::interior) continue;
    for (int k = 0; k < 2; ++k)
      out.push_back({mesh.edge[e][k], mesh.edge_tag[e], mesh.vertex[mesh.edge[e][k]]});
  }
  return out;
}

std::vector<BoundaryNode> boundary_nodes_p2(const TriMesh& mesh) {
  std::vector<BoundaryNode> out;
  const int nv = mesh.n_vertices();
  for (int e = 0; e < mesh.n_edges(); ++e) {
    if (mesh.edge_tag[e] == BoundaryTag::interior) continue;
    const Vec2 mid = 0.5 * (mesh.vertex[mesh.edge[e][0]] + mesh.vertex[mesh.edge[e][1]]);
    out.push_back({mesh.edge[e][0], mesh.edge_tag[e], mesh.vertex[mesh.edge[e][0]]});
    out.push_back({mesh.edge[e][1], mesh.edge_tag[e], mesh.vertex[mesh.edge[e][1]]});
    out.push_back({nv + e, mesh.edge_tag[e], mid});
  }
  return out;
}

} // namespace chns
