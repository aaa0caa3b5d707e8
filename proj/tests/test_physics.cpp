#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "chns/physics.hpp"

using namespace chns;

namespace {

ModelParams table_defaults() { return ModelParams{}; }

// Central difference with the sampling offsets used throughout: breakpoints
// of the limiter are approached from both sides at distance h so stencils
// never straddle a kink in the second derivative.
double fd(double (*f)(const ModelParams&, double), const ModelParams& p,
          double x, double h) {
  return (f(p, x + h) - f(p, x - h)) / (2.0 * h);
}

} // namespace

TEST_CASE("fluid fraction is the affine map onto [2 delta, 1]") {
  const auto p = table_defaults();
  CHECK(fluid_fraction(p, 0.0) == doctest::Approx(2.0 * p.delta).epsilon(1e-15));
  CHECK(fluid_fraction(p, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  // Midpoint maps to 0.5 + delta (midpoint of [2 delta, 1]).
  CHECK(fluid_fraction(p, 0.5) == doctest::Approx(0.5 + p.delta).epsilon(1e-15));
  CHECK(fluid_fraction(p, 0.75) > fluid_fraction(p, 0.25));
}

TEST_CASE("densities at the frozen example point") {
  ModelParams p;
  p.rho = 2.0;
  p.delta = 0.1;
  CHECK(fluid_density(p, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(total_density(p, 0.5) == doctest::Approx(1.2).epsilon(1e-15));
}

TEST_CASE("phase flux coefficient swaps mobility during preprocessing") {
  const auto p = table_defaults();
  CHECK(ch_flux_coeff(p, false) == doctest::Approx(0.03).epsilon(1e-15));
  CHECK(ch_flux_coeff(p, true) == doctest::Approx(30.0).epsilon(1e-15));
}

TEST_CASE("limiter value, support and the frozen junction value") {
  const auto p = table_defaults(); // delta_dw = 0.02, gamma_dw = 0.015
  CHECK(limiter(p, 0.0) == 0.0);
  CHECK(limiter(p, 0.5) == 0.0);
  CHECK(limiter(p, 1e-6) == 0.0);
  CHECK(limiter(p, -p.gamma_dw) == doctest::Approx(0.0009).epsilon(1e-12));
  for (double x = -0.2; x <= 0.01; x += 1e-3) CHECK(limiter(p, x) >= 0.0);
}

TEST_CASE("limiter is C1 at both breakpoints and convex in between") {
  const auto p = table_defaults();
  // One-sided limits of value and slope agree across each junction; probe at
  // distance small enough that curvature (bounded by ~130) is negligible.
  const double h = 1e-12;
  for (double b : {-p.gamma_dw, 0.0}) {
    CHECK(std::abs(limiter(p, b - h) - limiter(p, b + h)) <= 1e-11);
    CHECK(std::abs(limiter_prime(p, b - h) - limiter_prime(p, b + h)) <= 1e-9);
  }
  for (double x = -0.1; x <= 0.05; x += 1e-3)
    CHECK(limiter_second(p, x) >= 0.0);
}

TEST_CASE("double well values at the frozen points") {
  const auto p = table_defaults();
  CHECK(double_well(p, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(double_well(p, 1.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(double_well(p, 0.5) == doctest::Approx(0.0625).epsilon(1e-14));
  CHECK(double_well_prime(p, 0.5) == doctest::Approx(0.0).epsilon(1e-14));
  for (double x = -0.25; x <= 1.25; x += 1e-3) CHECK(double_well(p, x) >= 0.0);
}

TEST_CASE("double well derivative matches finite differences near breakpoints") {
  const auto p = table_defaults();
  const double h = 1e-6;
  std::vector<double> samples;
  for (double b : {-p.gamma_dw, 0.0, 1.0, 1.0 + p.gamma_dw}) {
    samples.push_back(b - h);
    samples.push_back(b + h);
  }
  for (double x = -0.1; x <= 1.1; x += 0.013) samples.push_back(x);
  for (double x : samples) {
    const double exact = double_well_prime(p, x);
    const double approx = fd(&double_well, p, x, h);
    // Relative where the slope is resolvable, absolute at critical points.
    CHECK(std::abs(approx - exact) <=
          std::max(1e-6 * std::abs(exact), 1e-10));
  }
}

TEST_CASE("convex/concave split reassembles the double well exactly") {
  const auto p = table_defaults();
  for (double x = -0.3; x <= 1.3; x += 7e-4) {
    CHECK(std::abs(convex_part(p, x) + concave_part(p, x) - double_well(p, x)) <= 1e-14);
    CHECK(std::abs(convex_prime(p, x) + concave_prime(p, x) -
                   double_well_prime(p, x)) <= 1e-13);
    CHECK(convex_second(p, x) >= 0.0); // implicit part stays convex
  }
  // Explicit part has constant curvature -1.
  CHECK(concave_prime(p, 0.2) - concave_prime(p, 0.1) ==
        doctest::Approx(-0.1).epsilon(1e-12));
}

TEST_CASE("convex derivative is consistent and monotone") {
  const auto p = table_defaults();
  const double h = 1e-6;
  // Offset grid keeps FD stencils from straddling the curvature kinks at the
  // limiter breakpoints; the kinks themselves are covered by the breakpoint
  // +-h samples of the double-well test.
  double prev = convex_prime(p, -0.3 + 0.5e-3);
  for (double x = -0.3 + 1.5e-3; x <= 1.3; x += 1e-3) {
    const double cur = convex_prime(p, x);
    CHECK(cur >= prev - 1e-12);
    prev = cur;
    const double approx = fd(&convex_part, p, x, h);
    CHECK(std::abs(approx - cur) <= std::max(1e-6 * std::abs(cur), 1e-9));
  }
}

TEST_CASE("drag ramp hits d0 at zero fraction and vanishes above the cutoff") {
  const auto p = table_defaults(); // d0 = 1000, d_max = 0.9
  CHECK(drag(p, 0.0) == doctest::Approx(p.d0).epsilon(1e-14));
  CHECK(drag(p, p.d_max) == 0.0);
  CHECK(drag(p, 0.95) == 0.0);
  CHECK(drag(p, 1.0) == 0.0);
  // Continuous near the cutoff and decreasing on the ramp.
  CHECK(drag(p, p.d_max - 1e-8) <= 1e-11);
  CHECK(drag(p, 0.3) > drag(p, 0.6));
  const double pt = fluid_fraction(p, 0.0);
  CHECK(drag(p, pt) ==
        doctest::Approx(p.d0 * std::pow(p.d_max - pt, 2) / (p.d_max * p.d_max))
            .epsilon(1e-14));
}

TEST_CASE("reaction closures at the frozen points") {
  const auto p = table_defaults(); // k_c = 0.1, c_star = 2
  CHECK(reaction_q(0.5) == doctest::Approx(std::sqrt(2.0) / 4.0).epsilon(1e-14));
  CHECK(reaction_q(0.0) == 0.0);
  CHECK(reaction_q(1.0) == 0.0);
  CHECK(reaction_q(-0.1) == 0.0); // clamped outside [0,1]
  CHECK(reaction_q(1.1) == 0.0);
  CHECK(reaction_rate(p, 1.0) == 0.0); // equilibrium concentration
  CHECK(reaction_rate(p, 2.0) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(reaction_rate_prime(p, 1.5) == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("tanh initial data: half on the circle, saturated away from it") {
  const double eps = 0.03;
  const std::vector<Circle> one = {{{0.5, 0.5}, 0.2}};
  CHECK(tanh_circles(one, eps, {0.7, 0.5}) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(tanh_circles(one, eps, {0.5, 0.5}) <= 1e-3);
  CHECK(tanh_circles(one, eps, {1.5, 0.5}) == doctest::Approx(1.0).epsilon(1e-6));

  const std::vector<Circle> two = {{{0.5, 0.5}, 0.2}, {{1.65, 0.65}, 0.175}};
  CHECK(tanh_circles(two, eps, {1.1, 0.1}) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(tanh_circles(two, eps, {1.65, 0.65}) <= 1e-3);
}

TEST_CASE("parameter validation rejects out-of-order closure constants") {
  ModelParams ok;
  CHECK_NOTHROW(ok.validate());

  ModelParams p1;
  p1.epsilon = 0.0;
  CHECK_THROWS_AS(p1.validate(), std::invalid_argument);
  ModelParams p2;
  p2.delta_dw = p2.delta + 0.01;
  CHECK_THROWS_AS(p2.validate(), std::invalid_argument);
  ModelParams p3;
  p3.gamma_dw = p3.delta_dw;
  CHECK_THROWS_AS(p3.validate(), std::invalid_argument);
  ModelParams p4;
  p4.d_max = 1.5;
  CHECK_THROWS_AS(p4.validate(), std::invalid_argument);
  ModelParams p5;
  p5.n_pre = -1;
  CHECK_THROWS_AS(p5.validate(), std::invalid_argument);
}
