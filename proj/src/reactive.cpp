#include "chns/reactive.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

namespace chns {

ReactiveState make_reactive_state(const ScalarSpaceP1& s1,
                                  const VectorSpaceP2& s2) {
  ReactiveState rs;
  rs.state = make_state(s1, s2, true);
  // Equilibrium concentration: r(1) = 0, so the default state reacts with
  // nothing until a scenario perturbs it.
  for (auto& x : rs.state.c) x = 1.0;
  return rs;
}

double reacted_increment(const SystemState& old_state,
                         const SystemState& new_state,
                         const ModelParams& prm) {
  if (old_state.scalar == nullptr)
    throw std::invalid_argument("state spaces not set");
  if (old_state.c.empty() || new_state.c.empty())
    throw std::invalid_argument("reacted increment requires concentration fields");
  const TriMesh& mesh = *old_state.scalar->mesh;
  const QuadratureRule& rule = quadrature(5);

  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriGeom geom = tri_geom(mesh, t);
    const std::array<int, 3> sd = old_state.scalar->cell_dofs(t);
    for (int q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.bary[std::size_t(q)];
      const double jxw = 2.0 * geom.area * rule.weight[std::size_t(q)];
      double phi_old_q = 0.0, c_new_q = 0.0;
      for (int k = 0; k < 3; ++k) {
        phi_old_q +=
            old_state.phi[std::size_t(sd[std::size_t(k)])] * lam[std::size_t(k)];
        c_new_q +=
            new_state.c[std::size_t(sd[std::size_t(k)])] * lam[std::size_t(k)];
      }
      total += (reaction_q(phi_old_q) / prm.epsilon) *
               reaction_rate(prm, c_new_q) * jxw;
    }
  }
  return prm.tau * total;
}

std::pair<ReactiveState, StepStats>
step_reactive(const ReactiveState& old_state, const ModelParams& prm,
              const StrategyConfig& strategy,
              const std::vector<DirichletBc>& bcs) {
  if (old_state.state.c.empty())
    throw std::invalid_argument("reactive step requires a concentration field");
  AssemblyFlags flags;
  flags.reactive = true;
  auto [sol, stats] = advance_step(old_state.state, prm, strategy, bcs, flags);
  ReactiveState next;
  next.reacted_mass =
      old_state.reacted_mass + reacted_increment(old_state.state, sol, prm);
  next.state = std::move(sol);
  return {std::move(next), stats};
}

bool detect_clogging(const SystemState& state, double threshold) {
  if (state.scalar == nullptr)
    throw std::invalid_argument("state spaces not set");
  const TriMesh& mesh = *state.scalar->mesh;
  const int n = mesh.n_vertices();

  std::vector<int> root(std::size_t(n), 0);
  for (int i = 0; i < n; ++i) root[std::size_t(i)] = i;
  auto find = [&root](int i) {
    while (root[std::size_t(i)] != i) {
      root[std::size_t(i)] = root[std::size_t(root[std::size_t(i)])];
      i = root[std::size_t(i)];
    }
    return i;
  };
  auto solid = [&](int i) { return state.phi[std::size_t(i)] < threshold; };

  for (const std::array<int, 2>& e : mesh.edge)
    if (solid(e[0]) && solid(e[1])) root[std::size_t(find(e[0]))] = find(e[1]);

  double y_min = mesh.vertex[0].y, y_max = mesh.vertex[0].y;
  for (const Vec2& x : mesh.vertex) {
    y_min = std::min(y_min, x.y);
    y_max = std::max(y_max, x.y);
  }
  const double span = y_max - y_min;
  // Pick out boundary-row vertices by coordinate: exact for the structured
  // meshes in use, tolerant of refinement since bisection keeps vertices.
  const double tol = 1e-12 * std::max(1.0, span);

  std::vector<char> touches_bottom(std::size_t(n), 0);
  std::vector<char> touches_top(std::size_t(n), 0);
  for (int i = 0; i < n; ++i) {
    if (!solid(i)) continue;
    const int r = find(i);
    if (mesh.vertex[std::size_t(i)].y <= y_min + tol)
      touches_bottom[std::size_t(r)] = 1;
    if (mesh.vertex[std::size_t(i)].y >= y_max - tol)
      touches_top[std::size_t(r)] = 1;
  }
  for (int i = 0; i < n; ++i)
    if (touches_bottom[std::size_t(i)] && touches_top[std::size_t(i)])
      return true;
  return false;
}

} // namespace chns
