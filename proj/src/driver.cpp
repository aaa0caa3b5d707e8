#include "chns/driver.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <string>

#include "chns/linalg.hpp"

namespace chns {

namespace {

void apply_bc_values(SystemState& st, const std::vector<DirichletBc>& bcs) {
  for (const DirichletBc& bc : bcs) {
    const std::size_t i = std::size_t(bc.index);
    switch (bc.field) {
      case Field::phi: st.phi.at(i) = bc.value; break;
      case Field::mu: st.mu.at(i) = bc.value; break;
      case Field::c: st.c.at(i) = bc.value; break;
      case Field::v: st.v.at(i) = bc.value; break;
      case Field::p: st.p.at(i) = bc.value; break;
    }
  }
}

LinearSolverFn make_direct_solver() {
  auto solver = std::make_shared<DirectSolver>();
  return [solver](const SpMat& a, const Vec& rhs, double) {
    solver->factorize(a);
    return LinearSolveResult{solver->solve(rhs), 1};
  };
}

LinearSolverFn make_flow_iterative_solver() {
  return [](const SpMat& a, const Vec& rhs, double lin_red) {
    Ilu0 ilu(a);
    Vec x = Vec::Zero(rhs.size());
    IterStats st = fgmres(
        a, rhs, x, [&ilu](const Vec& r) { return ilu.apply(r); }, lin_red, 200,
        1000);
    if (!st.converged)
      throw std::runtime_error("flow subsystem solve stalled at relative residual " +
                               std::to_string(st.rel_residual));
    return LinearSolveResult{x, st.iterations};
  };
}

LinearSolverFn make_phase_iterative_solver(int n_first) {
  return [n_first](const SpMat& a, const Vec& rhs, double lin_red) {
    SimplePrecond simple(a, n_first);
    Vec x = Vec::Zero(rhs.size());
    IterStats st = fgmres(
        a, rhs, x, [&simple](const Vec& r) { return simple.apply(r); }, lin_red,
        200, 10000);
    if (!st.converged)
      throw std::runtime_error("phase subsystem solve stalled at relative residual " +
                               std::to_string(st.rel_residual));
    return LinearSolveResult{x, st.iterations};
  };
}

// Newton on the unknown slice [begin, begin+n) of the packed vector, all
// other entries frozen. The slice must coincide with a residual block of the
// same rows (phase block or flow block).
NewtonStats solve_rows(Vec& x, int begin, int n, const SystemState& old_state,
                       SystemState& scratch, const UnknownLayout& lay,
                       const ModelParams& prm,
                       const std::vector<DirichletBc>& bcs, AssemblyFlags flags,
                       const NewtonOptions& nopts, const LinearSolverFn& lin) {
  Vec xs = x.segment(begin, n);
  auto residual = [&, begin, n](const Vec& xsv) -> Vec {
    Vec xf = x;
    xf.segment(begin, n) = xsv;
    unpack_state(lay, xf, scratch);
    Vec rf = assemble_residual(old_state, scratch, prm, bcs, flags);
    return rf.segment(begin, n);
  };
  auto jacobian = [&, begin, n](const Vec& xsv) -> SpMat {
    Vec xf = x;
    xf.segment(begin, n) = xsv;
    unpack_state(lay, xf, scratch);
    BlockSystem sys = assemble_jacobian(old_state, scratch, prm, bcs, flags);
    Blocks blocks = extract_blocks(sys);
    return begin == 0 ? blocks.a_ch : blocks.a_ns;
  };
  NewtonStats st = newton_solve(residual, jacobian, lin, xs, nopts);
  x.segment(begin, n) = xs;
  return st;
}

std::pair<SystemState, StepStats>
step_monolithic_impl(const SystemState& old_state, const ModelParams& prm,
                     const StrategyConfig& strategy,
                     const std::vector<DirichletBc>& bcs, AssemblyFlags flags) {
  SystemState guess = old_state;
  apply_bc_values(guess, bcs);
  const UnknownLayout lay = make_layout(guess);
  Vec x = pack_state(lay, guess);
  SystemState scratch = guess;

  auto residual = [&](const Vec& xv) {
    unpack_state(lay, xv, scratch);
    return assemble_residual(old_state, scratch, prm, bcs, flags);
  };
  auto jacobian = [&](const Vec& xv) {
    unpack_state(lay, xv, scratch);
    return assemble_jacobian(old_state, scratch, prm, bcs, flags).matrix;
  };

  NewtonStats ns;
  try {
    ns = newton_solve(residual, jacobian, make_direct_solver(), x,
                      strategy.newton);
  } catch (const NewtonError& e) {
    throw StepError(std::string("implicit step failed: ") + e.what());
  }
  if (!ns.converged)
    throw StepError("implicit step did not converge in " +
                    std::to_string(ns.iterations) + " iterations; residual " +
                    std::to_string(ns.residual_norms.back()) + " tolerance " +
                    std::to_string(ns.max_tol));

  unpack_state(lay, x, guess);
  guess.time = old_state.time + prm.tau;

  StepStats stats;
  stats.converged = true;
  stats.newton_iterations = ns.iterations;
  stats.linear_iterations =
      std::accumulate(ns.linear_iters.begin(), ns.linear_iters.end(), 0);
  stats.residual_norm = ns.residual_norms.back();
  stats.max_tol = ns.max_tol;
  return {std::move(guess), stats};
}

std::pair<SystemState, StepStats>
step_partitioned_impl(const SystemState& old_state, const ModelParams& prm,
                      const StrategyConfig& strategy,
                      const std::vector<DirichletBc>& bcs,
                      AssemblyFlags flags) {
  if (strategy.coupling_rel_tol <= 0.0)
    throw std::invalid_argument("coupling_rel_tol must be positive");
  if (strategy.max_coupling_iterations < 1)
    throw std::invalid_argument("max_coupling_iterations must be at least 1");

  SystemState guess = old_state;
  apply_bc_values(guess, bcs);
  const UnknownLayout lay = make_layout(guess);
  Vec x = pack_state(lay, guess);
  SystemState scratch = guess;

  unpack_state(lay, x, scratch);
  const double r0 =
      assemble_residual(old_state, scratch, prm, bcs, flags).norm();
  const double max_tol =
      std::max(strategy.coupling_rel_tol * r0, strategy.newton.abs_tol);

  const bool iterative = strategy.mode == StrategyMode::partitioned_iterative;
  const LinearSolverFn flow_lin =
      iterative ? make_flow_iterative_solver() : make_direct_solver();
  const LinearSolverFn phase_lin =
      iterative ? make_phase_iterative_solver(lay.n_p1) : make_direct_solver();

  StepStats stats;
  stats.max_tol = max_tol;
  const int nch = lay.ch_size();
  const int nns = lay.ns_size();

  double rn = r0;
  while (stats.coupling_iterations < strategy.max_coupling_iterations) {
    ++stats.coupling_iterations;
    try {
      NewtonStats ns = solve_rows(x, nch, nns, old_state, scratch, lay, prm,
                                  bcs, flags, strategy.newton, flow_lin);
      if (!ns.converged)
        throw StepError("flow sub-solve did not converge");
      stats.ns_newton_iterations += ns.iterations;
      stats.linear_iterations += std::accumulate(ns.linear_iters.begin(),
                                                 ns.linear_iters.end(), 0);

      NewtonStats ch = solve_rows(x, 0, nch, old_state, scratch, lay, prm, bcs,
                                  flags, strategy.newton, phase_lin);
      if (!ch.converged)
        throw StepError("phase sub-solve did not converge");
      stats.ch_newton_iterations += ch.iterations;
      stats.linear_iterations += std::accumulate(ch.linear_iters.begin(),
                                                 ch.linear_iters.end(), 0);
    } catch (const NewtonError& e) {
      throw StepError("coupling iteration " +
                      std::to_string(stats.coupling_iterations) +
                      " failed: " + e.what());
    } catch (const StepError& e) {
      throw StepError("coupling iteration " +
                      std::to_string(stats.coupling_iterations) +
                      " failed: " + e.what());
    }

    unpack_state(lay, x, scratch);
    rn = assemble_residual(old_state, scratch, prm, bcs, flags).norm();
    if (rn <= max_tol) {
      stats.converged = true;
      break;
    }
  }
  stats.newton_iterations =
      stats.ns_newton_iterations + stats.ch_newton_iterations;
  stats.residual_norm = rn;
  if (!stats.converged)
    throw StepError("coupling loop exhausted " +
                    std::to_string(stats.coupling_iterations) +
                    " iterations; residual " + std::to_string(rn) +
                    " tolerance " + std::to_string(max_tol));

  unpack_state(lay, x, guess);
  guess.time = old_state.time + prm.tau;
  return {std::move(guess), stats};
}

} // namespace

std::pair<SystemState, StepStats>
step_monolithic(const SystemState& old_state, const ModelParams& prm,
                const StrategyConfig& strategy,
                const std::vector<DirichletBc>& bcs) {
  return step_monolithic_impl(old_state, prm, strategy, bcs, {});
}

std::pair<SystemState, StepStats>
step_partitioned(const SystemState& old_state, const ModelParams& prm,
                 const StrategyConfig& strategy,
                 const std::vector<DirichletBc>& bcs) {
  return step_partitioned_impl(old_state, prm, strategy, bcs, {});
}

std::pair<SystemState, StepStats>
advance_step(const SystemState& old_state, const ModelParams& prm,
             const StrategyConfig& strategy, const std::vector<DirichletBc>& bcs,
             AssemblyFlags flags) {
  if (flags.preprocessing)
    throw std::invalid_argument(
        "preprocessing steps run through preprocess_initial");
  if (strategy.mode == StrategyMode::monolithic)
    return step_monolithic_impl(old_state, prm, strategy, bcs, flags);
  return step_partitioned_impl(old_state, prm, strategy, bcs, flags);
}

EnergyReport compute_energy(const SystemState& state,
                            const SystemState& prev_state,
                            const ModelParams& prm) {
  if (state.scalar == nullptr || state.vector == nullptr)
    throw std::invalid_argument("state spaces not set");
  if (prev_state.phi.size() != state.phi.size())
    throw std::invalid_argument("previous state has a different phase field size");
  const TriMesh& mesh = *state.scalar->mesh;
  const QuadratureRule& rule = quadrature(5);

  std::vector<std::array<double, 6>> n2(rule.size());
  std::vector<std::array<std::array<double, 3>, 6>> dn2(rule.size());
  for (int q = 0; q < rule.size(); ++q) {
    p2_shapes(rule.bary[std::size_t(q)], n2[std::size_t(q)]);
    p2_shape_derivs(rule.bary[std::size_t(q)], dn2[std::size_t(q)]);
  }

  EnergyReport rep;
  rep.time = state.time;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriGeom geom = tri_geom(mesh, t);
    const std::array<int, 3> sd = state.scalar->cell_dofs(t);
    const std::array<int, 6> vn = state.vector->cell_nodes(t);

    Eigen::Vector2d grad_phi = Eigen::Vector2d::Zero();
    Eigen::Vector2d grad_mu = Eigen::Vector2d::Zero();
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector2d g(geom.grad_lambda[std::size_t(k)].x,
                              geom.grad_lambda[std::size_t(k)].y);
      grad_phi += state.phi[std::size_t(sd[std::size_t(k)])] * g;
      grad_mu += state.mu[std::size_t(sd[std::size_t(k)])] * g;
    }

    for (int q = 0; q < rule.size(); ++q) {
      const auto& lam = rule.bary[std::size_t(q)];
      const double jxw = 2.0 * geom.area * rule.weight[std::size_t(q)];

      double phi_q = 0.0, phi_prev_q = 0.0;
      for (int k = 0; k < 3; ++k) {
        phi_q += state.phi[std::size_t(sd[std::size_t(k)])] * lam[std::size_t(k)];
        phi_prev_q +=
            prev_state.phi[std::size_t(sd[std::size_t(k)])] * lam[std::size_t(k)];
      }

      Eigen::Vector2d v_q = Eigen::Vector2d::Zero();
      Eigen::Matrix2d grad_v = Eigen::Matrix2d::Zero();
      for (int a = 0; a < 6; ++a) {
        Eigen::Vector2d ga = Eigen::Vector2d::Zero();
        for (int k = 0; k < 3; ++k) {
          ga.x() += dn2[std::size_t(q)][std::size_t(a)][std::size_t(k)] *
                    geom.grad_lambda[std::size_t(k)].x;
          ga.y() += dn2[std::size_t(q)][std::size_t(a)][std::size_t(k)] *
                    geom.grad_lambda[std::size_t(k)].y;
        }
        for (int comp = 0; comp < 2; ++comp) {
          const double coeff =
              state.v[std::size_t(VectorSpaceP2::dof_of(vn[std::size_t(a)], comp))];
          v_q(comp) += coeff * n2[std::size_t(q)][std::size_t(a)];
          grad_v.row(comp) += coeff * ga.transpose();
        }
      }

      rep.kinetic += 0.5 * prm.rho * (phi_q + prm.delta) * v_q.squaredNorm() * jxw;
      rep.dw_energy += (prm.sigma / prm.epsilon) * double_well(prm, phi_q) * jxw;
      rep.grad_energy +=
          0.5 * prm.sigma * prm.epsilon * grad_phi.squaredNorm() * jxw;

      const Eigen::Matrix2d sym = 0.5 * (grad_v + grad_v.transpose());
      rep.visc_dissipation += 2.0 * prm.gamma * sym.squaredNorm() * jxw;
      rep.drag_dissipation += prm.rho *
                              drag(prm, fluid_fraction(prm, phi_prev_q)) *
                              v_q.squaredNorm() * jxw;
      rep.ch_dissipation += prm.sigma * prm.mobility * prm.epsilon *
                            grad_mu.squaredNorm() * jxw;
    }
  }
  rep.total = rep.kinetic + rep.dw_energy + rep.grad_energy;
  return rep;
}

DissipationVerdict check_dissipation(const EnergyReport& f_old,
                                     const EnergyReport& f_new, double tau,
                                     double max_tol) {
  if (tau <= 0.0) throw std::invalid_argument("tau must be positive");
  DissipationVerdict v;
  v.lhs = (f_new.total - f_old.total) / tau;
  v.rhs = -(f_new.ch_dissipation + f_new.visc_dissipation +
            f_new.drag_dissipation);
  v.slack = std::max(1e-10 * std::abs(f_old.total), 10.0 * max_tol);
  v.margin = v.rhs + v.slack - v.lhs;
  v.pass = v.margin >= 0.0;
  return v;
}

// Exact area of {phi_h < 1/2} for the piecewise-linear field. The level
// line cuts each mixed triangle into a wedge whose edge fractions follow
// from the vertex values, so the result is a smooth function of the
// coefficients. This is the geometric solid region: the conserved phase
// mass stays fixed while this set shrinks or vanishes.
static double sublevel_area(const TriMesh& mesh,
                            const std::vector<double>& phi) {
  double area = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const std::array<int, 3>& v = mesh.tri[std::size_t(t)];
    const double f[3] = {phi[std::size_t(v[0])] - 0.5,
                         phi[std::size_t(v[1])] - 0.5,
                         phi[std::size_t(v[2])] - 0.5};
    const int neg = (f[0] < 0.0) + (f[1] < 0.0) + (f[2] < 0.0);
    const double full = mesh.tri_area(t);
    if (neg == 0) continue;
    if (neg == 3) {
      area += full;
      continue;
    }
    // The lone vertex on one side spans a wedge with the two crossing
    // points; its area fraction is the product of the edge fractions.
    const bool lone_negative = neg == 1;
    int i = 0;
    while ((f[i] < 0.0) != lone_negative) ++i;
    const double a = f[i] / (f[i] - f[(i + 1) % 3]);
    const double b = f[i] / (f[i] - f[(i + 2) % 3]);
    area += lone_negative ? full * a * b : full * (1.0 - a * b);
  }
  return area;
}

ShrinkageReport measure_solid(const SystemState& state, const ModelParams& prm) {
  if (state.scalar == nullptr)
    throw std::invalid_argument("state spaces not set");
  const double omega = mesh_measure(*state.scalar->mesh);
  ShrinkageReport rep;
  rep.solid_area = sublevel_area(*state.scalar->mesh, state.phi);
  rep.effective_radius = std::sqrt(rep.solid_area / std::numbers::pi);
  rep.critical_radius = std::cbrt(std::sqrt(6.0) / (8.0 * std::numbers::pi) *
                                  omega * prm.epsilon);
  rep.has_solid = rep.solid_area > 0.0;
  if (rep.has_solid) {
    rep.cahn_number = prm.epsilon / rep.effective_radius;
    rep.predicted_shrinkage = std::sqrt(2.0) * omega /
                              (24.0 * std::numbers::pi) * prm.epsilon /
                              (rep.effective_radius * rep.effective_radius);
  }
  return rep;
}

int count_solid_components(const SystemState& state, double threshold) {
  if (state.scalar == nullptr)
    throw std::invalid_argument("state spaces not set");
  const TriMesh& mesh = *state.scalar->mesh;
  const int n = mesh.n_vertices();
  std::vector<int> parent(std::size_t(n), 0);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int a) {
    while (parent[std::size_t(a)] != a) {
      parent[std::size_t(a)] = parent[std::size_t(parent[std::size_t(a)])];
      a = parent[std::size_t(a)];
    }
    return a;
  };
  auto solid = [&](int i) { return state.phi[std::size_t(i)] < threshold; };
  for (const auto& e : mesh.edge) {
    if (solid(e[0]) && solid(e[1])) {
      const int ra = find(e[0]), rb = find(e[1]);
      if (ra != rb) parent[std::size_t(ra)] = rb;
    }
  }
  int count = 0;
  for (int i = 0; i < n; ++i)
    if (solid(i) && find(i) == i) ++count;
  return count;
}

std::vector<double> initial_potential(const ScalarSpaceP1& s1,
                                      const VectorSpaceP2& s2,
                                      const std::vector<double>& phi,
                                      const ModelParams& prm) {
  SystemState st = make_state(s1, s2, false);
  if (phi.size() != st.phi.size())
    throw std::invalid_argument("phase field size does not match the space");
  st.phi = phi;
  const int n1 = s1.n_dofs();
  BlockSystem sys = assemble_jacobian(st, st, prm, {}, {});
  const SpMat mass = sys.matrix.block(n1, n1, n1, n1);
  const Vec r0 = assemble_residual(st, st, prm, {}, {});
  const Vec mu = lu_solve(mass, Vec(-r0.segment(n1, n1)));
  return std::vector<double>(mu.data(), mu.data() + n1);
}

PreprocessResult preprocess_initial(const std::function<double(Vec2)>& indicator,
                                    const ScalarSpaceP1& s1,
                                    const VectorSpaceP2& s2,
                                    const ModelParams& prm,
                                    const StrategyConfig& strategy,
                                    const std::vector<DirichletBc>& phi_bcs) {
  for (const DirichletBc& bc : phi_bcs)
    if (bc.field != Field::phi)
      throw std::invalid_argument(
          "preprocessing accepts phase Dirichlet conditions only");
  if (prm.n_pre < 0)
    throw std::invalid_argument("n_pre must be nonnegative");

  PreprocessResult result;
  result.phi = interpolate(s1, indicator);

  if (prm.n_pre > 0) {
    SystemState old_st = make_state(s1, s2, false);
    old_st.phi = result.phi;
    apply_bc_values(old_st, phi_bcs);
    const UnknownLayout lay = make_layout(old_st);
    const AssemblyFlags flags{true, false};
    const LinearSolverFn lin = make_direct_solver();

    for (int it = 1; it <= prm.n_pre; ++it) {
      SystemState scratch = old_st;
      Vec x = pack_state(lay, old_st);
      NewtonStats ns;
      try {
        ns = solve_rows(x, 0, lay.ch_size(), old_st, scratch, lay, prm,
                        phi_bcs, flags, strategy.newton, lin);
      } catch (const NewtonError& e) {
        throw StepError("preprocessing step " + std::to_string(it) +
                        " failed: " + e.what());
      }
      if (!ns.converged)
        throw StepError("preprocessing step " + std::to_string(it) +
                        " did not converge; residual " +
                        std::to_string(ns.residual_norms.back()));
      result.newton_total += ns.iterations;
      unpack_state(lay, x, old_st);
      old_st.time += prm.tau;
    }
    result.phi = old_st.phi;
  }

  const auto [lo, hi] = std::minmax_element(result.phi.begin(), result.phi.end());
  result.min_value = *lo;
  result.max_value = *hi;
  return result;
}

} // namespace chns
