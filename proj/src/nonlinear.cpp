#include "chns/nonlinear.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace chns {

namespace {

Vec checked_residual(const ResidualFn& residual, const Vec& x, int iteration) {
  Vec r = residual(x);
  if (!r.allFinite())
    throw NewtonError("newton_solve: non-finite residual at iteration " +
                      std::to_string(iteration));
  return r;
}

} // namespace

NewtonStats newton_solve(const ResidualFn& residual, const JacobianFn& jacobian,
                         const LinearSolverFn& linear_solver, Vec& x,
                         const NewtonOptions& opts) {
  if (opts.max_iterations <= 0 || opts.rel_tol <= 0.0 || opts.abs_tol <= 0.0 ||
      opts.min_lin_red <= 0.0 || opts.max_line_search <= 0 ||
      opts.damping <= 0.0 || opts.damping >= 1.0)
    throw std::invalid_argument("newton_solve: invalid options");

  NewtonStats stats;
  Vec r = checked_residual(residual, x, 0);
  double rn = r.norm();
  stats.max_tol = std::max(rn * opts.rel_tol, opts.abs_tol);
  stats.residual_norms.push_back(rn);
  if (rn <= stats.max_tol) {
    stats.converged = true;
    return stats;
  }

  double rn_prev = 0.0;
  for (int m = 0; m < opts.max_iterations; ++m) {
    // The ratio of consecutive residual norms predicts the next contraction;
    // requesting much more reduction than that from the linear solver would
    // be wasted, requesting less would stall the outer iteration.
    double ratio_term = opts.min_lin_red;
    if (m > 0)
      ratio_term = std::min(opts.min_lin_red, (rn * rn) / (rn_prev * rn_prev));
    const double lin_red = std::max(stats.max_tol / (10.0 * rn), ratio_term);

    LinearSolveResult lin;
    try {
      lin = linear_solver(jacobian(x), -r, lin_red);
    } catch (const std::exception& e) {
      throw NewtonError("newton_solve: linear solve failed at iteration " +
                        std::to_string(m) + ": " + e.what());
    }

    // Defect-reduction line search: accept the first step that shrinks the
    // residual norm below (1 - lambda/4) of the current one.
    double lambda = 1.0;
    int trials = 0;
    Vec x_try, r_try;
    double rn_try = 0.0;
    bool accepted = false;
    while (trials < opts.max_line_search) {
      ++trials;
      x_try = x + lambda * lin.delta;
      r_try = checked_residual(residual, x_try, m + 1);
      rn_try = r_try.norm();
      if (rn_try <= (1.0 - lambda / 4.0) * rn) {
        accepted = true;
        break;
      }
      lambda *= opts.damping;
    }
    if (!accepted) {
      // Keep the smallest trial step; the caller sees the flag and the
      // residual history and decides whether to abandon the run.
      stats.line_search_exhausted = true;
    }

    x = x_try;
    r = r_try;
    rn_prev = rn;
    rn = rn_try;
    ++stats.iterations;
    stats.residual_norms.push_back(rn);
    stats.line_search_counts.push_back(trials);
    stats.linear_iters.push_back(lin.iterations);
    if (rn <= stats.max_tol) {
      stats.converged = true;
      break;
    }
  }
  return stats;
}

} // namespace chns
