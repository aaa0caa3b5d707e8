#include "chns/physics.hpp"

#include <cmath>
#include <stdexcept>

namespace chns {

void ModelParams::validate() const {
  const auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string("ModelParams: ") + name + " must be positive");
  };
  positive(rho, "rho");
  positive(gamma, "gamma");
  positive(d0, "d0");
  positive(mobility, "mobility");
  positive(sigma, "sigma");
  positive(epsilon, "epsilon");
  positive(delta, "delta");
  positive(delta_dw, "delta_dw");
  positive(gamma_dw, "gamma_dw");
  positive(m_pre, "m_pre");
  positive(diffusivity, "diffusivity");
  positive(c_star, "c_star");
  positive(tau, "tau");
  if (k_c < 0.0) throw std::invalid_argument("ModelParams: k_c must be nonnegative");
  if (f_bar < 0.0) throw std::invalid_argument("ModelParams: f_bar must be nonnegative");
  if (n_pre < 0) throw std::invalid_argument("ModelParams: n_pre must be nonnegative");
  if (!(d_max > 0.0 && d_max <= 1.0))
    throw std::invalid_argument("ModelParams: d_max must lie in (0,1]");
  if (delta_dw > delta)
    throw std::invalid_argument("ModelParams: delta_dw must not exceed delta");
  if (gamma_dw >= delta_dw)
    throw std::invalid_argument("ModelParams: gamma_dw must be below delta_dw");
}

double limiter(const ModelParams& p, double phi) {
  const double d = p.delta_dw, g = p.gamma_dw;
  if (phi >= 0.0) return 0.0;
  if (phi > -g) return d * phi * phi / (phi + d);
  // Affine continuation matching value and slope at phi = -g.
  const double value = d * g * g / (d - g);
  const double slope = -d * g * (2.0 * d - g) / ((d - g) * (d - g));
  return value + slope * (phi + g);
}

double limiter_prime(const ModelParams& p, double phi) {
  const double d = p.delta_dw, g = p.gamma_dw;
  if (phi >= 0.0) return 0.0;
  if (phi > -g) {
    const double s = phi + d;
    return d * phi * (phi + 2.0 * d) / (s * s);
  }
  return -d * g * (2.0 * d - g) / ((d - g) * (d - g));
}

double limiter_second(const ModelParams& p, double phi) {
  const double d = p.delta_dw, g = p.gamma_dw;
  if (phi >= 0.0 || phi <= -g) return 0.0;
  const double s = phi + d;
  return 2.0 * d * d * d / (s * s * s);
}

double double_well(const ModelParams& p, double phi) {
  const double q = phi * (1.0 - phi);
  return q * q + limiter(p, phi) + limiter(p, 1.0 - phi);
}

double double_well_prime(const ModelParams& p, double phi) {
  return 2.0 * phi * (1.0 - phi) * (1.0 - 2.0 * phi) + limiter_prime(p, phi) -
         limiter_prime(p, 1.0 - phi);
}

// The quartic splits as phi^2(1-phi)^2 = (phi-1/2)^4 - (phi-1/2)^2/2 + 1/16;
// the limiter tails are convex and join the convex part.
double convex_part(const ModelParams& p, double phi) {
  const double u = phi - 0.5;
  return u * u * u * u + 1.0 / 16.0 + limiter(p, phi) + limiter(p, 1.0 - phi);
}

double convex_prime(const ModelParams& p, double phi) {
  const double u = phi - 0.5;
  return 4.0 * u * u * u + limiter_prime(p, phi) - limiter_prime(p, 1.0 - phi);
}

double convex_second(const ModelParams& p, double phi) {
  const double u = phi - 0.5;
  return 12.0 * u * u + limiter_second(p, phi) + limiter_second(p, 1.0 - phi);
}

double concave_part(const ModelParams&, double phi) {
  const double u = phi - 0.5;
  return -0.5 * u * u;
}

double concave_prime(const ModelParams&, double phi) { return -(phi - 0.5); }

double drag(const ModelParams& p, double phi_tilde) {
  if (phi_tilde > p.d_max) return 0.0;
  const double s = p.d_max - phi_tilde;
  return p.d0 * s * s / (p.d_max * p.d_max);
}

double reaction_q(double phi) {
  const double v = std::sqrt(2.0) * phi * (1.0 - phi);
  return v > 0.0 ? v : 0.0;
}

double reaction_rate(const ModelParams& p, double c) {
  return p.k_c * (c * c - 1.0);
}

double reaction_rate_prime(const ModelParams& p, double c) {
  return 2.0 * p.k_c * c;
}

double tanh_circles(const std::vector<Circle>& inclusions, double epsilon,
                    Vec2 x) {
  double value = 1.0;
  const double width = std::sqrt(2.0) * epsilon;
  for (const auto& c : inclusions)
    value *= 0.5 * (1.0 + std::tanh((dist(x, c.center) - c.radius) / width));
  return value;
}

} // namespace chns
