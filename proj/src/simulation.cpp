#include "chns/simulation.hpp"

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <utility>

#include "chns/output.hpp"

namespace chns {

namespace {

std::string snapshot_path(const std::string& out_dir, const Scenario& sc,
                          int step) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", step);
  return out_dir + "/" + scenario_name(sc.kind) + "_" + buf + ".vtk";
}

bool any_marked(const std::vector<std::uint8_t>& marks) {
  for (std::uint8_t m : marks)
    if (m) return true;
  return false;
}

std::vector<DirichletBc> phase_bcs_only(const std::vector<DirichletBc>& bcs) {
  std::vector<DirichletBc> out;
  for (const DirichletBc& bc : bcs)
    if (bc.field == Field::phi) out.push_back(bc);
  return out;
}

StepRecord make_record(int step, const SystemState& state,
                       const SystemState& prev, const ModelParams& prm,
                       bool reactive) {
  StepRecord rec;
  rec.step = step;
  rec.time = state.time;
  rec.energy = compute_energy(state, prev, prm);
  rec.solid_area = measure_solid(state, prm).solid_area;
  if (reactive) rec.clogged = detect_clogging(state);
  return rec;
}

} // namespace

std::shared_ptr<FeBundle> make_fe_bundle(TriMesh mesh) {
  auto fe = std::make_shared<FeBundle>();
  fe->mesh = std::move(mesh);
  fe->scalar = build_p1(fe->mesh);
  fe->vector = build_p2vec(fe->mesh);
  return fe;
}

RunResult run_simulation(const Scenario& sc, const ModelParams& prm_in,
                         const StrategyConfig& strategy,
                         const RunOptions& opts) {
  sc.validate();
  ModelParams prm = prm_in;
  if (opts.tau_override > 0.0) prm.tau = opts.tau_override;
  prm.validate();
  if (opts.nx < 1 || opts.ny < 1)
    throw std::invalid_argument("base grid must have at least one cell");

  const int n_steps = opts.n_steps < 0 ? sc.default_steps : opts.n_steps;
  const bool adapt_stepping = opts.adapt && !opts.energy_audit;
  const bool emit = !opts.out_dir.empty();
  if (emit) std::filesystem::create_directories(opts.out_dir);

  auto phase0 = [&sc](Vec2 x) { return initial_phase(sc, x); };

  RunResult res;
  res.fe = make_fe_bundle(build_rect_mesh(opts.nx, opts.ny, sc.lx, sc.ly));
  for (int level = 0; level < opts.initial_refine_levels; ++level) {
    const std::vector<double> phi = interpolate(res.fe->scalar, phase0);
    const std::vector<std::uint8_t> marks = mark_by_gradient(
        res.fe->mesh, phi, opts.refine_threshold, opts.max_refine_level);
    if (!any_marked(marks)) break;
    res.fe = make_fe_bundle(refine(res.fe->mesh, marks).mesh);
  }

  res.state = make_state(res.fe->scalar, res.fe->vector, sc.reactive);
  if (needs_preprocessing(sc)) {
    const std::vector<DirichletBc> bcs =
        realize_bcs(sc, res.fe->scalar, res.fe->vector, 1);
    res.state.phi = preprocess_initial(phase0, res.fe->scalar, res.fe->vector,
                                       prm, strategy, phase_bcs_only(bcs))
                        .phi;
  } else {
    res.state.phi = interpolate(res.fe->scalar, phase0);
  }
  res.state.mu =
      initial_potential(res.fe->scalar, res.fe->vector, res.state.phi, prm);
  for (auto& x : res.state.c) x = sc.c_init;

  res.records.push_back(
      make_record(0, res.state, res.state, prm, sc.reactive));
  res.records.back().verdict.pass = true;
  res.clogged = res.records.back().clogged;
  if (opts.observer) opts.observer(res.records.back());
  if (opts.state_observer) opts.state_observer(res.records.back(), res.state);
  if (emit && opts.vtk_stride > 0)
    write_vtk(res.state, prm, snapshot_path(opts.out_dir, sc, 0));

  for (int step = 1; step <= n_steps; ++step) {
    const std::vector<DirichletBc> bcs =
        realize_bcs(sc, res.fe->scalar, res.fe->vector, step);

    SystemState next;
    StepStats stats;
    try {
      if (sc.reactive) {
        ReactiveState rs;
        rs.state = res.state;
        rs.reacted_mass = res.reacted_mass;
        auto [sol, st] = step_reactive(rs, prm, strategy, bcs);
        next = std::move(sol.state);
        res.reacted_mass = sol.reacted_mass;
        stats = st;
      } else {
        auto [sol, st] = advance_step(res.state, prm, strategy, bcs);
        next = std::move(sol);
        stats = st;
      }
    } catch (const StepError& e) {
      throw StepError("time step " + std::to_string(step) + ": " + e.what());
    }

    StepRecord rec = make_record(step, next, res.state, prm, sc.reactive);
    rec.stats = stats;
    rec.verdict = check_dissipation(res.records.back().energy, rec.energy,
                                    prm.tau, stats.max_tol);
    res.state = std::move(next);
    res.clogged = res.clogged || rec.clogged;
    res.records.push_back(rec);
    if (opts.observer) opts.observer(rec);
    if (opts.state_observer) opts.state_observer(rec, res.state);
    if (emit && opts.vtk_stride > 0 && step % opts.vtk_stride == 0)
      write_vtk(res.state, prm, snapshot_path(opts.out_dir, sc, step));

    if (adapt_stepping && step < n_steps) {
      const std::vector<std::uint8_t> marks =
          mark_by_gradient(res.fe->mesh, res.state.phi, opts.refine_threshold,
                           opts.max_refine_level);
      if (any_marked(marks)) {
        RefineResult rr = refine(res.fe->mesh, marks);
        std::shared_ptr<FeBundle> fine = make_fe_bundle(std::move(rr.mesh));
        SystemState moved = make_state(fine->scalar, fine->vector, sc.reactive);
        moved.time = res.state.time;
        moved.phi = transfer(res.fe->scalar, res.state.phi, fine->scalar,
                             rr.parent);
        moved.mu =
            transfer(res.fe->scalar, res.state.mu, fine->scalar, rr.parent);
        moved.p =
            transfer(res.fe->scalar, res.state.p, fine->scalar, rr.parent);
        moved.v =
            transfer(res.fe->vector, res.state.v, fine->vector, rr.parent);
        if (sc.reactive)
          moved.c =
              transfer(res.fe->scalar, res.state.c, fine->scalar, rr.parent);
        res.fe = std::move(fine);
        res.state = std::move(moved);
        // Refinement reproduces the fields exactly (nested spaces), but the
        // next verdict must compare energies evaluated on one mesh.
        res.records.back().energy = compute_energy(res.state, res.state, prm);
      }
    }
  }

  if (emit) {
    std::vector<EnergyRow> rows;
    rows.reserve(res.records.size());
    for (const StepRecord& r : res.records)
      rows.push_back({r.step, r.energy, r.solid_area});
    write_energy_csv(rows, opts.out_dir + "/energy.csv");
  }
  return res;
}

} // namespace chns
