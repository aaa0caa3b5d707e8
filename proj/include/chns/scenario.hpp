// Problem presets: domain geometry, initial phase layout, boundary
// conditions, and the driving protocol for the three benchmark setups plus
// a custom shell. Boundary conditions are realized per time step so
// protocol events (stopping the lid) stay pure functions of the step index.
#pragma once

#include <string>
#include <vector>

#include "chns/assembly.hpp"

namespace chns {

enum class ScenarioKind {
  cavity_inclusions,
  channel_obstacles,
  reactive_channel,
  custom,
};

// Axis-aligned solid obstacle, corners (x0,y0) and (x1,y1).
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

struct Scenario {
  ScenarioKind kind = ScenarioKind::custom;
  double lx = 2.0, ly = 1.0;

  // Solid inclusions: circles enter diffusely through the radial tanh
  // product; rectangles are sharp 0/1 data and require the smoothing
  // preprocessing pass before time stepping.
  std::vector<Circle> circles;
  std::vector<Rect> rectangles;

  // inflow = false: enclosed cavity whose lid drives v1 on the top boundary
  // until lid_stop_step, all other walls no-slip, pressure pinned at one
  // node (only gradients of p are determined in an enclosed flow).
  // inflow = true: parabolic inlet on the left, no-slip top/bottom, open
  // outlet on the right with p = 0 there, phi = 1 on inlet and outlet.
  bool inflow = false;
  int lid_stop_step = 0; // steps 1..lid_stop_step are driven; 0 = never

  bool reactive = false;
  double c_init = 1.0;  // initial concentration everywhere
  double c_inlet = 1.5; // injected at the inlet when reactive

  ModelParams params;
  int default_steps = 200;

  // Throws std::invalid_argument when geometry leaves the domain or the
  // reactive/inflow switches are inconsistent (concentration injection
  // needs an inlet).
  void validate() const;
};

const char* scenario_name(ScenarioKind kind);
Scenario make_scenario(ScenarioKind kind);
// Accepts the names printed by scenario_name; throws std::invalid_argument.
Scenario scenario_by_name(const std::string& name);

// Pointwise initial phase: product of radial tanh profiles over the
// circles, cut to exactly zero inside any rectangle.
double initial_phase(const Scenario& sc, Vec2 x);

// True when the initial data is sharp and must run the smoothing pass.
bool needs_preprocessing(const Scenario& sc);

// v1 on the top boundary (enclosed setups) and on the inlet (inflow
// setups); both parabolas vanish at the wall corners.
double lid_profile(const Scenario& sc, double x1);
double inlet_profile(const Scenario& sc, double x2);

// Dirichlet rows for computing time step `step` (1-based). Every boundary
// node receives at most one row per field.
std::vector<DirichletBc> realize_bcs(const Scenario& sc,
                                     const ScalarSpaceP1& s1,
                                     const VectorSpaceP2& s2, int step);

} // namespace chns
