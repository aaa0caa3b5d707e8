#pragma once

// Time integration: monolithic and partitioned stepping, preprocessing of
// sharp initial data, energy accounting, and solid-phase diagnostics.
//
// The partitioned modes alternate a flow sub-solve (v, p with phase fields
// frozen) and a phase sub-solve (phi, mu, and c when present, with the flow
// frozen) until the FULL coupled residual meets the same tolerance the
// monolithic Newton would use, so both strategies share one acceptance
// criterion. Sub-solves run their own Newton loops whose tolerances derive
// from their own initial residuals.
//
// Energy reports evaluate every integral with the assembly quadrature rule;
// the dissipation check compares (F_new - F_old)/tau against the negated
// dissipation sum evaluated at the new state, with the drag coefficient
// frozen at the previous phase field exactly as the time stepping does.

#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "chns/assembly.hpp"
#include "chns/nonlinear.hpp"

namespace chns {

enum class StrategyMode { monolithic, partitioned_direct, partitioned_iterative };

struct StrategyConfig {
  StrategyMode mode = StrategyMode::monolithic;
  // Relative tolerance for the full coupled residual in partitioned modes;
  // the absolute floor is newton.abs_tol.
  double coupling_rel_tol = 1e-7;
  int max_coupling_iterations = 50;
  NewtonOptions newton;
};

struct StepStats {
  bool converged = false;
  int coupling_iterations = 0; // 0 for monolithic
  int newton_iterations = 0;   // monolithic count, or sum over all sub-solves
  int ns_newton_iterations = 0;
  int ch_newton_iterations = 0;
  int linear_iterations = 0; // inner iterations over all linear solves
  double residual_norm = 0.0; // full coupled residual at acceptance
  double max_tol = 0.0;       // full-system acceptance tolerance
};

struct StepError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// One implicit step of the full system. Dirichlet values are imposed on the
// initial guess and kept by the identity rows. Throws StepError when the
// solve does not reach tolerance.
std::pair<SystemState, StepStats>
step_monolithic(const SystemState& old_state, const ModelParams& prm,
                const StrategyConfig& strategy,
                const std::vector<DirichletBc>& bcs);

std::pair<SystemState, StepStats>
step_partitioned(const SystemState& old_state, const ModelParams& prm,
                 const StrategyConfig& strategy,
                 const std::vector<DirichletBc>& bcs);

// Dispatch on strategy.mode; flags select the reactive assembly.
std::pair<SystemState, StepStats>
advance_step(const SystemState& old_state, const ModelParams& prm,
             const StrategyConfig& strategy, const std::vector<DirichletBc>& bcs,
             AssemblyFlags flags = {});

struct EnergyReport {
  double kinetic = 0.0;
  double dw_energy = 0.0;
  double grad_energy = 0.0;
  double total = 0.0;
  double visc_dissipation = 0.0;
  double drag_dissipation = 0.0;
  double ch_dissipation = 0.0;
  double time = 0.0;
};

// Free energy of `state` plus the dissipation integrals of the step that
// produced it; prev_state supplies the frozen phase field in the drag
// coefficient. For an initial report pass the state itself as prev_state.
EnergyReport compute_energy(const SystemState& state,
                            const SystemState& prev_state,
                            const ModelParams& prm);

struct DissipationVerdict {
  bool pass = false;
  double lhs = 0.0;    // (F_new - F_old) / tau
  double rhs = 0.0;    // negated dissipation sum of the new report
  double slack = 0.0;
  double margin = 0.0; // rhs + slack - lhs, nonnegative on pass
};

DissipationVerdict check_dissipation(const EnergyReport& f_old,
                                     const EnergyReport& f_new, double tau,
                                     double max_tol);

struct ShrinkageReport {
  // Area of {phi < 1/2} measured exactly on the piecewise-linear field.
  // Distinct from the conserved phase mass: an inclusion's mid-level set
  // can shrink and vanish while the integral of phi stays fixed.
  double solid_area = 0.0;
  double effective_radius = 0.0;
  bool has_solid = false; // radius-derived fields absent when area vanishes
  double cahn_number = 0.0;
  double critical_radius = 0.0;     // radius below which an inclusion vanishes
  double predicted_shrinkage = 0.0; // radius loss of a surviving inclusion
};

ShrinkageReport measure_solid(const SystemState& state, const ModelParams& prm);

// Connected components of the solid region (vertices with phi < threshold,
// adjacency along mesh edges).
int count_solid_components(const SystemState& state, double threshold = 0.5);

// Chemical potential consistent with a given phase field: solves the
// potential rows alone, which are linear in mu.
std::vector<double> initial_potential(const ScalarSpaceP1& s1,
                                      const VectorSpaceP2& s2,
                                      const std::vector<double>& phi,
                                      const ModelParams& prm);

struct PreprocessResult {
  std::vector<double> phi;
  double min_value = 0.0;
  double max_value = 0.0;
  int newton_total = 0;
};

// Nodal interpolation of a sharp 0/1 indicator followed by n_pre phase-only
// steps at the preprocessing mobility with the flow frozen at rest. Phase
// Dirichlet conditions (if any) are honored; flow conditions are irrelevant
// here and rejected.
PreprocessResult preprocess_initial(const std::function<double(Vec2)>& indicator,
                                    const ScalarSpaceP1& s1,
                                    const VectorSpaceP2& s2,
                                    const ModelParams& prm,
                                    const StrategyConfig& strategy,
                                    const std::vector<DirichletBc>& phi_bcs = {});

} // namespace chns
