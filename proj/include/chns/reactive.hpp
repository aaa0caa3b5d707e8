// Precipitation/dissolution extension: a dissolved species c rides on the
// phase-field flow, and a rate law r(c) = k_c (c^2 - 1) converts fluid to
// solid (precipitation, c > 1) or back (dissolution, c < 1) inside the
// interface band picked out by q(phi).
//
// The concentration equation is solved in the reformulated variable c - c*,
// which removes the reaction term from the concentration rows entirely; the
// reaction enters only the phase and momentum equations. No discrete energy
// inequality is claimed for the reactive system.
#pragma once

#include "chns/driver.hpp"

namespace chns {

struct ReactiveState {
  SystemState state;
  // Cumulative solid volume produced by the reaction, sum over steps of
  // tau * integral (q(phi_old)/eps) r(c_new). Positive = net precipitation.
  // At every converged step the fluid mass satisfies
  //   integral phi(t_n) = integral phi(0) - reacted_mass
  // up to Newton tolerances, which ties the bookkeeping to the solver.
  double reacted_mass = 0.0;
};

ReactiveState make_reactive_state(const ScalarSpaceP1& s1,
                                  const VectorSpaceP2& s2);

// One coupled implicit step including the concentration field. Monolithic
// mode solves c together with everything else; partitioned mode groups c
// with the phase-field sweep. Throws std::invalid_argument when the state
// carries no concentration field; solver failures surface as StepError.
std::pair<ReactiveState, StepStats>
step_reactive(const ReactiveState& old_state, const ModelParams& prm,
              const StrategyConfig& strategy,
              const std::vector<DirichletBc>& bcs);

// Reaction-driven solid production of one step, tau * integral of
// (q(phi_old)/eps) r(c_new), evaluated with the assembly quadrature so it
// matches the discrete phase-equation bookkeeping exactly.
double reacted_increment(const SystemState& old_state,
                         const SystemState& new_state,
                         const ModelParams& prm);

// True when one connected solid component (phi < threshold across an edge's
// both endpoints) touches both the bottom and the top of the mesh, i.e. the
// deposit spans the channel cross-section. Reported, never asserted:
// the stopping criterion for clogging runs is qualitative.
bool detect_clogging(const SystemState& state, double threshold = 0.5);

} // namespace chns
