#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "chns/reactive.hpp"

#include <cmath>
#include <vector>

using chns::DirichletBc;
using chns::Field;
using chns::ModelParams;
using chns::ReactiveState;
using chns::StrategyConfig;
using chns::StrategyMode;
using chns::SystemState;

namespace {

std::vector<DirichletBc> box_bcs(const chns::TriMesh& mesh) {
  std::vector<DirichletBc> bcs;
  for (const chns::BoundaryNode& bn : chns::boundary_nodes_p2(mesh)) {
    bcs.push_back({Field::v, chns::VectorSpaceP2::dof_of(bn.node, 0), 0.0});
    bcs.push_back({Field::v, chns::VectorSpaceP2::dof_of(bn.node, 1), 0.0});
  }
  bcs.push_back({Field::p, 0, 0.0});
  return bcs;
}

// Dissolved amount integral (phi + delta) * (c - c*), on the assembly
// quadrature so it matches the discrete conservation identity.
double solute_content(const SystemState& st, const ModelParams& prm) {
  const chns::TriMesh& mesh = *st.scalar->mesh;
  const chns::QuadratureRule& rule = chns::quadrature(5);
  double total = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const chns::TriGeom geom = chns::tri_geom(mesh, t);
    const std::array<int, 3> sd = st.scalar->cell_dofs(t);
    for (int q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.bary[std::size_t(q)];
      double phi_q = 0.0, c_q = 0.0;
      for (int k = 0; k < 3; ++k) {
        phi_q += st.phi[std::size_t(sd[std::size_t(k)])] * lam[std::size_t(k)];
        c_q += st.c[std::size_t(sd[std::size_t(k)])] * lam[std::size_t(k)];
      }
      total += (phi_q + prm.delta) * (c_q - prm.c_star) * 2.0 * geom.area *
               rule.weight[std::size_t(q)];
    }
  }
  return total;
}

ReactiveState inclusion_reactive(const chns::ScalarSpaceP1& s1,
                                 const chns::VectorSpaceP2& s2,
                                 const ModelParams& prm, double c0) {
  ReactiveState rs = chns::make_reactive_state(s1, s2);
  rs.state.phi = chns::interpolate(s1, [&](chns::Vec2 x) {
    return chns::tanh_circles({{{1.0, 0.5}, 0.3}}, prm.epsilon, x);
  });
  rs.state.mu = chns::initial_potential(s1, s2, rs.state.phi, prm);
  for (auto& x : rs.state.c) x = c0;
  return rs;
}

double linf(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

} // namespace

TEST_CASE("equilibrium reactive state is a fixed point") {
  chns::TriMesh mesh = chns::build_rect_mesh(6, 3, 2.0, 1.0);
  chns::ScalarSpaceP1 s1 = chns::build_p1(mesh);
  chns::VectorSpaceP2 s2 = chns::build_p2vec(mesh);
  ModelParams prm;
  ReactiveState rs = chns::make_reactive_state(s1, s2);
  for (auto& x : rs.state.phi) x = 1.0;
  StrategyConfig strategy;

  auto [sol, stats] = chns::step_reactive(rs, prm, strategy, box_bcs(mesh));
  CHECK(stats.converged);
  CHECK(stats.newton_iterations == 0);
  CHECK(sol.state.phi == rs.state.phi);
  CHECK(sol.state.c == rs.state.c);
  CHECK(sol.reacted_mass == 0.0);
}

TEST_CASE("concentration rows factor through c - c*") {
  // With c identically at the solid concentration the reformulated equation
  // is satisfied no matter what phi, v, or mu do: every term carries the
  // factor (c - c*) except diffusion, which sees a constant c.
  chns::TriMesh mesh = chns::build_rect_mesh(4, 2, 2.0, 1.0);
  chns::ScalarSpaceP1 s1 = chns::build_p1(mesh);
  chns::VectorSpaceP2 s2 = chns::build_p2vec(mesh);
  ModelParams prm;
  prm.epsilon = 0.1;
  SystemState st = chns::make_state(s1, s2, true);
  for (std::size_t i = 0; i < st.phi.size(); ++i)
    st.phi[i] = 0.3 + 0.05 * std::sin(double(i));
  for (std::size_t i = 0; i < st.v.size(); ++i)
    st.v[i] = 0.2 * std::cos(double(i));
  for (std::size_t i = 0; i < st.mu.size(); ++i)
    st.mu[i] = 0.1 * std::sin(2.0 * double(i));
  for (auto& x : st.c) x = prm.c_star;

  chns::AssemblyFlags flags;
  flags.reactive = true;
  chns::Vec r = chns::assemble_residual(st, st, prm, {}, flags);
  const chns::UnknownLayout lay = chns::make_layout(st);
  for (int i = 0; i < lay.n_p1; ++i)
    CHECK(std::abs(r(lay.c_offset() + i)) <= 1e-14);

  // The reaction source still drives the phase rows: r(c*) != 0.
  double phase_norm = 0.0;
  for (int i = 0; i < lay.n_p1; ++i)
    phase_norm = std::max(phase_norm, std::abs(r(lay.phi_offset() + i)));
  CHECK(phase_norm > 1e-6);
}

TEST_CASE("zero rate constant reproduces the plain trajectory") {
  chns::TriMesh mesh = chns::build_rect_mesh(8, 4, 2.0, 1.0);
  chns::ScalarSpaceP1 s1 = chns::build_p1(mesh);
  chns::VectorSpaceP2 s2 = chns::build_p2vec(mesh);
  ModelParams prm;
  prm.epsilon = 0.1;
  prm.delta = 0.1;
  prm.k_c = 0.0;
  const std::vector<DirichletBc> bcs = box_bcs(mesh);
  StrategyConfig strategy;

  ReactiveState rs = inclusion_reactive(s1, s2, prm, 1.0);
  for (std::size_t i = 0; i < rs.state.c.size(); ++i) {
    const chns::Vec2 x = s1.dof_coord(int(i));
    rs.state.c[i] = 1.0 + 0.3 * std::sin(3.0 * x.x) * std::cos(2.0 * x.y);
  }

  SystemState plain = chns::make_state(s1, s2, false);
  plain.phi = rs.state.phi;
  plain.mu = rs.state.mu;

  const double content0 = solute_content(rs.state, prm);
  for (int n = 0; n < 5; ++n) {
    auto [rsol, rstats] = chns::step_reactive(rs, prm, strategy, bcs);
    auto [psol, pstats] = chns::advance_step(plain, prm, strategy, bcs);
    CHECK(rstats.converged);
    CHECK(pstats.converged);
    CHECK(linf(rsol.state.phi, psol.phi) <= 1e-10);
    CHECK(linf(rsol.state.mu, psol.mu) <= 1e-10);
    CHECK(linf(rsol.state.v, psol.v) <= 1e-10);
    CHECK(linf(rsol.state.p, psol.p) <= 1e-10);
    CHECK(rsol.reacted_mass == 0.0);

    // No reaction and no boundary influx: the dissolved amount integral is
    // conserved up to the solver tolerance (row sum of the c-equations).
    const double content = solute_content(rsol.state, prm);
    const double slack = 10.0 * prm.tau * std::sqrt(double(s1.n_dofs())) *
                         std::max(rstats.max_tol, 1e-12);
    CHECK(std::abs(content - content0) <= double(n + 1) * slack);

    rs = std::move(rsol);
    plain = std::move(psol);
  }
}

TEST_CASE("partitioned reactive stepping matches monolithic") {
  chns::TriMesh mesh = chns::build_rect_mesh(8, 4, 2.0, 1.0);
  chns::ScalarSpaceP1 s1 = chns::build_p1(mesh);
  chns::VectorSpaceP2 s2 = chns::build_p2vec(mesh);
  ModelParams prm;
  prm.epsilon = 0.1;
  prm.delta = 0.1;
  const std::vector<DirichletBc> bcs = box_bcs(mesh);

  ReactiveState mono = inclusion_reactive(s1, s2, prm, 1.5);
  ReactiveState part = mono;
  StrategyConfig ms;
  StrategyConfig ps;
  ps.mode = StrategyMode::partitioned_direct;

  for (int n = 0; n < 3; ++n) {
    auto [msol, mstats] = chns::step_reactive(mono, prm, ms, bcs);
    auto [psol, pstats] = chns::step_reactive(part, prm, ps, bcs);
    CHECK(mstats.converged);
    CHECK(pstats.converged);
    CHECK(pstats.coupling_iterations >= 1);
    CHECK(linf(msol.state.phi, psol.state.phi) <= 1e-6);
    CHECK(linf(msol.state.c, psol.state.c) <= 1e-6);
    CHECK(linf(msol.state.v, psol.state.v) <= 1e-6);
    CHECK(std::abs(msol.reacted_mass - psol.reacted_mass) <= 1e-6);
    mono = std::move(msol);
    part = std::move(psol);
  }
}

TEST_CASE("reaction bookkeeping ties fluid mass to the reacted amount") {
  chns::TriMesh mesh = chns::build_rect_mesh(8, 4, 2.0, 1.0);
  chns::ScalarSpaceP1 s1 = chns::build_p1(mesh);
  chns::VectorSpaceP2 s2 = chns::build_p2vec(mesh);
  ModelParams prm;
  prm.epsilon = 0.1;
  prm.delta = 0.1;
  const std::vector<DirichletBc> bcs = box_bcs(mesh);
  StrategyConfig strategy;

  auto run = [&](double c0, int steps) {
    ReactiveState rs = inclusion_reactive(s1, s2, prm, c0);
    const double mass0 = chns::integrate(s1, rs.state.phi);
    double slack = 0.0;
    for (int n = 0; n < steps; ++n) {
      auto [sol, stats] = chns::step_reactive(rs, prm, strategy, bcs);
      slack += 10.0 * prm.tau * std::sqrt(double(s1.n_dofs())) *
               std::max(stats.max_tol, 1e-12);
      rs = std::move(sol);
    }
    const double mass = chns::integrate(s1, rs.state.phi);
    CHECK(std::abs(mass - mass0 + rs.reacted_mass) <= slack);
    return rs;
  };

  SUBCASE("supersaturated solution precipitates") {
    ReactiveState grown = run(1.5, 5);
    CHECK(grown.reacted_mass > 0.0);

    ModelParams inert = prm;
    inert.k_c = 0.0;
    ReactiveState drift = inclusion_reactive(s1, s2, inert, 1.5);
    for (int n = 0; n < 5; ++n)
      drift = chns::step_reactive(drift, inert, strategy, bcs).first;

    // Relative to the purely curvature-driven run the reaction adds solid.
    const double area_grown = chns::measure_solid(grown.state, prm).solid_area;
    const double area_drift = chns::measure_solid(drift.state, prm).solid_area;
    CHECK(area_grown > area_drift);
  }

  SUBCASE("undersaturated solution dissolves") {
    ReactiveState shrunk = run(0.5, 5);
    CHECK(shrunk.reacted_mass < 0.0);
  }
}

TEST_CASE("clogging detector needs a solid band spanning the cross-section") {
  chns::TriMesh mesh = chns::build_rect_mesh(16, 8, 2.0, 1.0);
  chns::ScalarSpaceP1 s1 = chns::build_p1(mesh);
  chns::VectorSpaceP2 s2 = chns::build_p2vec(mesh);
  SystemState st = chns::make_state(s1, s2, false);

  auto set_phi = [&](auto f) { st.phi = chns::interpolate(s1, f); };

  set_phi([](chns::Vec2 x) {
    return (x.x >= 0.85 && x.x <= 1.15) ? 0.0 : 1.0;
  });
  CHECK(chns::detect_clogging(st));

  set_phi([](chns::Vec2 x) {
    return (x.x >= 0.85 && x.x <= 1.15 && x.y <= 0.8) ? 0.0 : 1.0;
  });
  CHECK(!chns::detect_clogging(st));

  set_phi([](chns::Vec2 x) { return x.y <= 0.3 ? 0.0 : 1.0; });
  CHECK(!chns::detect_clogging(st));

  for (auto& x : st.phi) x = 1.0;
  CHECK(!chns::detect_clogging(st));
}

TEST_CASE("reactive stepping rejects states without a concentration field") {
  chns::TriMesh mesh = chns::build_rect_mesh(4, 2, 2.0, 1.0);
  chns::ScalarSpaceP1 s1 = chns::build_p1(mesh);
  chns::VectorSpaceP2 s2 = chns::build_p2vec(mesh);
  ReactiveState rs;
  rs.state = chns::make_state(s1, s2, false);
  for (auto& x : rs.state.phi) x = 1.0;
  ModelParams prm;
  StrategyConfig strategy;
  CHECK_THROWS_AS(chns::step_reactive(rs, prm, strategy, box_bcs(mesh)),
                  std::invalid_argument);
}
