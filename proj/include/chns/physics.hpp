// Pointwise model closures of the diffuse-interface fluid/solid model.
//
// phi is the fluid phase fraction (1 = fluid, 0 = solid). The double well is
// regularized outside [0,1] by a C^1 limiter so the potential keeps finite
// barriers against overshoots, and it splits into a convex part (treated
// implicitly) and a concave part (explicit), which is what makes the time
// stepping unconditionally energy stable.
#pragma once

#include <vector>

#include "chns/geometry.hpp"

namespace chns {

struct ModelParams {
  double rho = 1.0;       // fluid density
  double gamma = 0.01;    // dynamic viscosity
  double d0 = 1000.0;     // drag magnitude in the solid
  double d_max = 0.9;     // fluid fraction where drag vanishes
  double mobility = 1.0;  // Cahn-Hilliard mobility M
  double sigma = 1.0;     // surface energy scale
  double epsilon = 0.03;  // interface half-width
  double delta = 0.03;    // residual fluid fraction inside the solid
  double delta_dw = 0.02; // limiter magnitude
  double gamma_dw = 0.015;// limiter crossover offset
  double m_pre = 1000.0;  // mobility during sharp-to-diffuse preprocessing
  int n_pre = 5;          // preprocessing step count

  // Solute transport / precipitation extension.
  double diffusivity = 1.0; // D
  double c_star = 2.0;      // concentration in the solid phase
  double k_c = 0.1;         // reaction rate constant

  double f_bar = 0.1; // inflow/lid velocity magnitude
  double tau = 0.02;  // time step size

  // Throws std::invalid_argument on parameter combinations the closures do
  // not admit (limiter offsets out of order, drag cutoff outside (0,1], ...).
  void validate() const;
};

// Effective fluid volume fraction, affine from [0,1] onto [2*delta, 1].
inline double fluid_fraction(const ModelParams& p, double phi) {
  return 2.0 * p.delta + (1.0 - 2.0 * p.delta) * phi;
}

inline double fluid_density(const ModelParams& p, double phi) {
  return p.rho * phi;
}

// Total density including the residual fluid content of the solid.
inline double total_density(const ModelParams& p, double phi) {
  return p.rho * (phi + p.delta);
}

// Coefficient of grad(mu) in the phase flux J = -M*eps*grad(mu).
inline double ch_flux_coeff(const ModelParams& p, bool preprocessing) {
  return (preprocessing ? p.m_pre : p.mobility) * p.epsilon;
}

// C^1 limiter: zero for phi >= 0, quadratic-over-linear ramp on
// (-gamma_dw, 0), affine continuation below -gamma_dw.
double limiter(const ModelParams& p, double phi);
double limiter_prime(const ModelParams& p, double phi);
double limiter_second(const ModelParams& p, double phi);

// Regularized double well W(phi) = phi^2(1-phi)^2 + l(phi) + l(1-phi) and
// its convex/concave split W = W_c + W_e.
double double_well(const ModelParams& p, double phi);
double double_well_prime(const ModelParams& p, double phi);
double convex_part(const ModelParams& p, double phi);
double convex_prime(const ModelParams& p, double phi);
double convex_second(const ModelParams& p, double phi);
double concave_part(const ModelParams& p, double phi);
double concave_prime(const ModelParams& p, double phi);

// Quadratic drag ramp in the effective fluid fraction, cut off at d_max.
double drag(const ModelParams& p, double phi_tilde);

// Interface indicator weighting the dissolution/precipitation source.
double reaction_q(double phi);
// r(c) with equilibrium at c = 1; positive for supersaturation.
double reaction_rate(const ModelParams& p, double c);
double reaction_rate_prime(const ModelParams& p, double c);

struct Circle {
  Vec2 center;
  double radius = 0.0;
};

// Product of radial tanh profiles: ~0 inside each circle, ~1 far away,
// exactly 1/2 on an isolated circle line.
double tanh_circles(const std::vector<Circle>& inclusions, double epsilon,
                    Vec2 x);

} // namespace chns
