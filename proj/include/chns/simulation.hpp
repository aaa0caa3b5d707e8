// Run orchestration: builds the mesh, refines it around the initial
// interface, smooths sharp initial data when the scenario calls for it,
// then advances in time with per-step energy accounting and optional
// refine-only adaptivity. Two runs from identical inputs produce identical
// records and files byte for byte.
#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "chns/driver.hpp"
#include "chns/reactive.hpp"
#include "chns/scenario.hpp"

namespace chns {

// Mesh with its function spaces. Heap-allocated behind a shared_ptr and
// never moved afterwards, so the space-to-mesh pointers stay valid.
struct FeBundle {
  TriMesh mesh;
  ScalarSpaceP1 scalar;
  VectorSpaceP2 vector;
};
std::shared_ptr<FeBundle> make_fe_bundle(TriMesh mesh);

struct StepRecord {
  int step = 0;
  double time = 0.0;
  EnergyReport energy;
  double solid_area = 0.0;
  // Dissipation check against the previous record; trivially passing at
  // step 0. While a lid or inlet drives the flow the inequality has no
  // guarantee and the verdict is informational.
  DissipationVerdict verdict;
  StepStats stats;
  bool clogged = false; // reactive runs only
};

struct RunOptions {
  int nx = 64, ny = 32;      // base grid
  int n_steps = -1;          // < 0: scenario default
  double tau_override = 0.0; // > 0 replaces the parameter table's step size
  bool adapt = false;        // refine-only adaptivity between steps
  bool energy_audit = false; // forces a fixed mesh while stepping
  int initial_refine_levels = 2;
  double refine_threshold = 0.1; // |grad phi|*diam marking threshold
  int max_refine_level = 4;
  int vtk_stride = 0;   // snapshot every k-th step; 0 = none
  std::string out_dir;  // empty: nothing is written to disk
  std::function<void(const StepRecord&)> observer;
  // Like observer but also handed the state the record describes, for
  // probes that need more than the recorded scalars. Runs after observer.
  std::function<void(const StepRecord&, const SystemState&)> state_observer;
};

struct RunResult {
  std::shared_ptr<FeBundle> fe;
  SystemState state; // final state, living on fe's spaces
  double reacted_mass = 0.0;
  std::vector<StepRecord> records; // records[0] describes the initial state
  bool clogged = false;            // latched from any reactive step
};

// Step failures carry the failing step index in their message.
RunResult run_simulation(const Scenario& sc, const ModelParams& prm,
                         const StrategyConfig& strategy,
                         const RunOptions& opts);

} // namespace chns
