#include "chns/mesh.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace chns {

namespace {

// Packs a sorted vertex pair into one key for edge lookups.
std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

double signed_area(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  return 0.5 * cross(p1 - p0, p2 - p0);
}

BoundaryTag classify_boundary(Vec2 mid, double lx, double ly) {
  const double tol = 1e-12 * std::max(lx, ly);
  if (std::abs(mid.x) < tol) return BoundaryTag::left;
  if (std::abs(mid.x - lx) < tol) return BoundaryTag::right;
  if (std::abs(mid.y) < tol) return BoundaryTag::bottom;
  if (std::abs(mid.y - ly) < tol) return BoundaryTag::top;
  throw std::runtime_error("mesh: boundary edge off the rectangle outline");
}

// Rebuilds edge table, adjacency and boundary tags from scratch.
void build_connectivity(TriMesh& m) {
  m.edge.clear();
  m.edge_tri.clear();
  m.tri_edge.assign(m.tri.size(), {-1, -1, -1});
  m.edge_tag.clear();

  std::unordered_map<std::uint64_t, int> index;
  index.reserve(3 * m.tri.size());
  for (int t = 0; t < m.n_triangles(); ++t) {
    const auto& v = m.tri[t];
    for (int k = 0; k < 3; ++k) {
      const int a = v[(k + 1) % 3];
      const int b = v[(k + 2) % 3];
      const auto key = edge_key(a, b);
      auto it = index.find(key);
      int e;
      if (it == index.end()) {
        e = m.n_edges();
        index.emplace(key, e);
        m.edge.push_back({std::min(a, b), std::max(a, b)});
        m.edge_tri.push_back({t, -1});
      } else {
        e = it->second;
        if (m.edge_tri[e][1] != -1)
          throw std::runtime_error("mesh: edge shared by more than two triangles");
        m.edge_tri[e][1] = t;
      }
      m.tri_edge[t][k] = e;
    }
  }

  m.edge_tag.assign(m.edge.size(), BoundaryTag::interior);
  for (int e = 0; e < m.n_edges(); ++e) {
    if (m.edge_tri[e][1] != -1) continue;
    const Vec2 mid = 0.5 * (m.vertex[m.edge[e][0]] + m.vertex[m.edge[e][1]]);
    m.edge_tag[e] = classify_boundary(mid, m.lx, m.ly);
  }
}

} // namespace

double TriMesh::tri_area(int t) const {
  const auto& v = tri[t];
  return signed_area(vertex[v[0]], vertex[v[1]], vertex[v[2]]);
}

double TriMesh::tri_diameter(int t) const {
  const auto& v = tri[t];
  const double a = dist(vertex[v[0]], vertex[v[1]]);
  const double b = dist(vertex[v[1]], vertex[v[2]]);
  const double c = dist(vertex[v[2]], vertex[v[0]]);
  return std::max({a, b, c});
}

Vec2 TriMesh::tri_centroid(int t) const {
  const auto& v = tri[t];
  return (1.0 / 3.0) * (vertex[v[0]] + vertex[v[1]] + vertex[v[2]]);
}

TriMesh build_rect_mesh(int nx, int ny, double lx, double ly) {
  if (nx < 1 || ny < 1 || !(lx > 0.0) || !(ly > 0.0))
    throw std::invalid_argument("build_rect_mesh: need nx,ny >= 1 and lx,ly > 0");

  TriMesh m;
  m.lx = lx;
  m.ly = ly;
  m.vertex.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      m.vertex.push_back({lx * i / nx, ly * j / ny});

  const auto vid = [nx](int i, int j) { return j * (nx + 1) + i; };
  m.tri.reserve(static_cast<std::size_t>(2) * nx * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int a = vid(i, j), b = vid(i + 1, j);
      const int c = vid(i + 1, j + 1), d = vid(i, j + 1);
      // Diagonal a-c is the refinement edge (hypotenuse) of both halves.
      m.tri.push_back({c, a, b});
      m.tri.push_back({a, c, d});
    }
  }
  m.tri_level.assign(m.tri.size(), 0);

  build_connectivity(m);
  for (int t = 0; t < m.n_triangles(); ++t)
    assert(m.tri_area(t) > 0.0);
  return m;
}

namespace {

// Mutable refinement state. Triangles are append-only; a bisected triangle
// is marked dead and replaced by its two children. The edge map tracks which
// live triangles currently share each edge so closure can find neighbors.
struct RefineWork {
  std::vector<Vec2> vertex;
  std::vector<std::array<int, 3>> tri;
  std::vector<int> level;
  std::vector<int> root; // ancestor index in the input mesh
  std::vector<char> alive;
  std::unordered_map<std::uint64_t, std::array<int, 2>> on_edge;
  std::unordered_map<std::uint64_t, int> midpoint;
  long bisections = 0;
  long bisection_cap = 0;

  void attach(int t) {
    for (int k = 0; k < 3; ++k) {
      const auto key = edge_key(tri[t][(k + 1) % 3], tri[t][(k + 2) % 3]);
      auto& slot = on_edge[key];
      // Fresh map entries value-initialize to {0,0}; a real slot never holds
      // the same triangle twice, so equal entries mean "empty".
      if (slot[0] == slot[1]) slot = {-1, -1};
      if (slot[0] == -1)
        slot[0] = t;
      else if (slot[1] == -1)
        slot[1] = t;
      else
        throw std::runtime_error("refine: edge acquired a third triangle");
    }
  }

  void detach(int t) {
    for (int k = 0; k < 3; ++k) {
      const auto key = edge_key(tri[t][(k + 1) % 3], tri[t][(k + 2) % 3]);
      auto& slot = on_edge[key];
      if (slot[0] == t)
        slot[0] = -1;
      else if (slot[1] == t)
        slot[1] = -1;
    }
  }

  int neighbor_on(int t, std::uint64_t key) const {
    const auto it = on_edge.find(key);
    if (it == on_edge.end()) return -1;
    const auto& slot = it->second;
    if (slot[0] != -1 && slot[0] != t) return slot[0];
    if (slot[1] != -1 && slot[1] != t) return slot[1];
    return -1;
  }

  int midpoint_of(int a, int b) {
    const auto key = edge_key(a, b);
    const auto it = midpoint.find(key);
    if (it != midpoint.end()) return it->second;
    const int v = static_cast<int>(vertex.size());
    vertex.push_back(0.5 * (vertex[a] + vertex[b]));
    midpoint.emplace(key, v);
    return v;
  }

  // Splits t along its refinement edge (v0,v1). Children keep CCW order and
  // get the old edges opposite the new vertex as their refinement edges.
  void split(int t) {
    ++bisections;
    if (bisections > bisection_cap)
      throw std::runtime_error("refine: closure did not terminate");
    const auto [v0, v1, v2] = std::array{tri[t][0], tri[t][1], tri[t][2]};
    const int m = midpoint_of(v0, v1);
    detach(t);
    alive[t] = 0;
    const int lvl = level[t] + 1;
    const int anc = root[t];
    const int c0 = static_cast<int>(tri.size());
    tri.push_back({v2, v0, m});
    tri.push_back({v1, v2, m});
    level.push_back(lvl);
    level.push_back(lvl);
    root.push_back(anc);
    root.push_back(anc);
    alive.push_back(1);
    alive.push_back(1);
    attach(c0);
    attach(c0 + 1);
  }

  // Bisects t, first making the neighbor across t's refinement edge
  // compatible (sharing that edge as its own refinement edge), then
  // splitting both. Recursion follows the standard newest-vertex closure.
  void bisect(int t) {
    if (!alive[t]) return;
    const auto key = edge_key(tri[t][0], tri[t][1]);
    int nb = neighbor_on(t, key);
    if (nb != -1 && edge_key(tri[nb][0], tri[nb][1]) != key) {
      bisect(nb);
      // The closure cascade may already have split t along this very edge.
      if (!alive[t]) return;
      nb = neighbor_on(t, key);
      assert(nb == -1 || edge_key(tri[nb][0], tri[nb][1]) == key);
    }
    split(t);
    if (nb != -1 && alive[nb]) split(nb);
  }
};

} // namespace

RefineResult refine(const TriMesh& mesh, const std::vector<std::uint8_t>& marks) {
  if (marks.size() != mesh.tri.size())
    throw std::invalid_argument("refine: marks size must equal triangle count");

  RefineWork w;
  w.vertex = mesh.vertex;
  w.tri = mesh.tri;
  w.level = mesh.tri_level;
  w.root.resize(mesh.tri.size());
  for (int t = 0; t < mesh.n_triangles(); ++t) w.root[t] = t;
  w.alive.assign(mesh.tri.size(), 1);
  w.bisection_cap = 10L * mesh.n_triangles();
  for (int t = 0; t < mesh.n_triangles(); ++t) w.attach(t);

  for (int t = 0; t < mesh.n_triangles(); ++t)
    if (marks[t] && w.alive[t]) w.bisect(t);

  RefineResult out;
  out.mesh.lx = mesh.lx;
  out.mesh.ly = mesh.ly;
  out.mesh.vertex = std::move(w.vertex);
  for (std::size_t t = 0; t < w.tri.size(); ++t) {
    if (!w.alive[t]) continue;
    out.mesh.tri.push_back(w.tri[t]);
    out.mesh.tri_level.push_back(w.level[t]);
    out.parent.push_back(w.root[t]);
  }
  build_connectivity(out.mesh);
  return out;
}

std::vector<std::uint8_t> mark_by_gradient(const TriMesh& mesh,
                                           const std::vector<double>& phi,
                                           double threshold, int max_level) {
  if (phi.size() != mesh.vertex.size())
    throw std::invalid_argument("mark_by_gradient: phi must be a P1 vertex vector");

  std::vector<std::uint8_t> marks(mesh.tri.size(), 0);
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    if (mesh.tri_level[t] >= max_level) continue;
    const auto& v = mesh.tri[t];
    const Vec2 p0 = mesh.vertex[v[0]], p1 = mesh.vertex[v[1]], p2 = mesh.vertex[v[2]];
    const double a2 = 2.0 * signed_area(p0, p1, p2);
    // Constant P1 gradient on the triangle.
    const Vec2 g = {(phi[v[0]] * (p1.y - p2.y) + phi[v[1]] * (p2.y - p0.y) +
                     phi[v[2]] * (p0.y - p1.y)) /
                        a2,
                    (phi[v[0]] * (p2.x - p1.x) + phi[v[1]] * (p0.x - p2.x) +
                     phi[v[2]] * (p1.x - p0.x)) /
                        a2};
    if (norm(g) * mesh.tri_diameter(t) > threshold) marks[t] = 1;
  }
  return marks;
}

} // namespace chns
