// Damped Newton iteration, generic over residual and Jacobian providers.
//
// The stop tolerance mixes a relative and an absolute floor:
//   max_tol = max(|r0| * rel_tol, abs_tol).
// Each linear solve only has to reduce its residual by a factor lin_red that
// tightens as the outer iteration approaches the solution, so early sloppy
// solves do not waste work and late solves do not limit the achievable
// accuracy. Step lengths are chosen by a defect-reduction line search with
// geometric damping.

#pragma once

#include "chns/linalg.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace chns {

struct NewtonOptions {
  int max_iterations = 100;
  double rel_tol = 1e-7;
  double abs_tol = 1e-9;
  // Default relative reduction requested from the linear solver while the
  // outer residual is still far from the target.
  double min_lin_red = 1e-3;
  int max_line_search = 100;
  double damping = 0.5; // trial steps are damping^k, k = 0, 1, ...
};

struct NewtonStats {
  int iterations = 0;
  bool converged = false;
  // True when some step ran out of line-search trials and fell back to the
  // smallest trial step.
  bool line_search_exhausted = false;
  double max_tol = 0.0;
  std::vector<double> residual_norms;  // size iterations + 1, starts at |r0|
  std::vector<int> line_search_counts; // residual evaluations per step
  std::vector<int> linear_iters;       // inner solver iterations per step
};

struct NewtonError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LinearSolveResult {
  Vec delta;
  int iterations = 0;
};

using ResidualFn = std::function<Vec(const Vec&)>;
using JacobianFn = std::function<SpMat(const Vec&)>;
// Solves J * delta = rhs, reducing the linear residual by the requested
// relative factor.
using LinearSolverFn =
    std::function<LinearSolveResult(const SpMat& jac, const Vec& rhs, double lin_red)>;

// Drives x to a root of the residual. x is updated in place; the caller reads
// stats.converged rather than catching an exception when the iteration budget
// runs out. Throws NewtonError on non-finite residuals or when the linear
// solver itself fails.
NewtonStats newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                         const LinearSolverFn& linear_solver, Vec& x,
                         const NewtonOptions& opts = {});

} // namespace chns
