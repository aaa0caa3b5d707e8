// Command-line front end.
//
//   chns_sim run          full simulation with VTK/CSV output
//   chns_sim preprocess   emit the smoothed initial phase field only
//   chns_sim energy-audit fixed-grid run printing per-step dissipation verdicts
//   chns_sim blocks       Jacobian block shapes and exact condition numbers
//
// Common flags: --config FILE, --scenario NAME, --strategy NAME, --out DIR,
// --adapt on|off, --steps N, --tau X. Flags override the config file.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "chns/config.hpp"
#include "chns/linalg.hpp"
#include "chns/output.hpp"
#include "chns/simulation.hpp"

namespace {

int usage(const char* argv0) {
  std::cerr
      << "usage: " << argv0 << " <command> [flags]\n"
      << "\n"
      << "commands:\n"
      << "  run           advance the configured scenario in time\n"
      << "  preprocess    smooth the sharp initial data and write phi0\n"
      << "  energy-audit  fixed-grid run, one dissipation verdict per step\n"
      << "  blocks        Jacobian block report on the base grid\n"
      << "\n"
      << "flags:\n"
      << "  --config FILE    key = value configuration file\n"
      << "  --scenario NAME  cavity_inclusions | channel_obstacles |\n"
      << "                   reactive_channel | custom\n"
      << "  --strategy NAME  monolithic | partitioned_direct |\n"
      << "                   partitioned_iterative\n"
      << "  --out DIR        output directory (no files without it)\n"
      << "  --adapt on|off   refine-only adaptivity between steps\n"
      << "  --steps N        number of time steps\n"
      << "  --tau X          time step size\n";
  return 2;
}

struct CliArgs {
  std::string command;
  std::string config_path;
  std::string scenario;
  std::string strategy;
  std::string out_dir;
  std::string adapt;
  std::string steps;
  std::string tau;
};

bool parse_args(int argc, char** argv, CliArgs& args, std::string& err) {
  if (argc < 2) {
    err = "missing command";
    return false;
  }
  args.command = argv[1];
  for (int i = 2; i < argc; ++i) {
    const std::string flag = argv[i];
    std::string* slot = nullptr;
    if (flag == "--config") slot = &args.config_path;
    else if (flag == "--scenario") slot = &args.scenario;
    else if (flag == "--strategy") slot = &args.strategy;
    else if (flag == "--out") slot = &args.out_dir;
    else if (flag == "--adapt") slot = &args.adapt;
    else if (flag == "--steps") slot = &args.steps;
    else if (flag == "--tau") slot = &args.tau;
    else {
      err = "unknown flag '" + flag + "'";
      return false;
    }
    if (i + 1 >= argc) {
      err = "flag '" + flag + "' needs a value";
      return false;
    }
    *slot = argv[++i];
  }
  return true;
}

chns::Config load_config(const CliArgs& args) {
  std::string text;
  if (!args.config_path.empty()) {
    std::ifstream in(args.config_path);
    if (!in)
      throw std::runtime_error("cannot open config '" + args.config_path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  // Flags run through the same parser and validation as the file contents.
  std::vector<std::pair<std::string, std::string>> overrides;
  if (!args.scenario.empty()) overrides.push_back({"scenario", args.scenario});
  if (!args.strategy.empty()) overrides.push_back({"strategy", args.strategy});
  if (!args.adapt.empty()) overrides.push_back({"adapt", args.adapt});
  if (!args.steps.empty()) overrides.push_back({"steps", args.steps});
  if (!args.tau.empty()) overrides.push_back({"tau", args.tau});
  return chns::parse_config(text, overrides);
}

void print_record(const chns::StepRecord& rec) {
  std::printf(
      "step %4d  t=%-8.4g  total=%-12.6g  solid=%-10.6g  newton=%d coupling=%d\n",
      rec.step, rec.time, rec.energy.total, rec.solid_area,
      rec.stats.newton_iterations, rec.stats.coupling_iterations);
}

int cmd_run(const chns::Config& cfg, const std::string& out_dir) {
  chns::RunOptions opts = cfg.run;
  opts.out_dir = out_dir;
  if (!out_dir.empty() && opts.vtk_stride == 0) opts.vtk_stride = 10;
  opts.observer = print_record;
  chns::RunResult res = chns::run_simulation(cfg.scenario, cfg.scenario.params,
                                             cfg.strategy, opts);
  const chns::StepRecord& last = res.records.back();
  std::printf("finished %zu steps, final time %g, total energy %.12g\n",
              res.records.size() - 1, last.time, last.energy.total);
  std::printf("solid area %.12g", last.solid_area);
  if (cfg.scenario.reactive)
    std::printf(", reacted mass %.12g, clogged %s", res.reacted_mass,
                res.clogged ? "yes" : "no");
  std::printf("\n");
  if (!out_dir.empty())
    std::printf("wrote %s/energy.csv and VTK snapshots every %d steps\n",
                out_dir.c_str(), opts.vtk_stride);
  return 0;
}

int cmd_preprocess(const chns::Config& cfg, const std::string& out_dir) {
  chns::RunOptions opts = cfg.run;
  opts.n_steps = 0;
  opts.out_dir.clear();
  chns::RunResult res = chns::run_simulation(cfg.scenario, cfg.scenario.params,
                                             cfg.strategy, opts);
  const chns::ShrinkageReport solid =
      chns::measure_solid(res.state, cfg.scenario.params);
  double lo = res.state.phi[0], hi = res.state.phi[0];
  for (double x : res.state.phi) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::printf("initial phase field: %d vertices, %d triangles\n",
              res.fe->mesh.n_vertices(), res.fe->mesh.n_triangles());
  std::printf("phi range [%.6g, %.6g], fluid volume %.12g, solid area %.12g\n",
              lo, hi,
              chns::integrate(res.fe->scalar, res.state.phi),
              solid.solid_area);
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::string path = out_dir + "/phi0.vtk";
    chns::write_vtk(res.state, cfg.scenario.params, path);
    std::printf("wrote %s\n", path.c_str());
  }
  return 0;
}

int cmd_energy_audit(const chns::Config& cfg, const std::string& out_dir) {
  chns::RunOptions opts = cfg.run;
  opts.out_dir = out_dir;
  opts.energy_audit = true;
  opts.vtk_stride = 0;
  int failures = 0;
  const int driven_until =
      cfg.scenario.inflow ? cfg.run.n_steps + 1 : cfg.scenario.lid_stop_step;
  opts.observer = [&failures, driven_until](const chns::StepRecord& rec) {
    const bool driven = rec.step <= driven_until;
    const bool counted = rec.step > 0 && !driven;
    if (counted && !rec.verdict.pass) ++failures;
    std::printf("step %4d  dE/dt=%- 13.6e  -D=%- 13.6e  margin=%- 10.3e  %s\n",
                rec.step, rec.verdict.lhs, rec.verdict.rhs,
                rec.verdict.margin,
                rec.step == 0      ? "initial"
                : driven           ? (rec.verdict.pass ? "pass (driven)"
                                                       : "driven")
                : rec.verdict.pass ? "pass"
                                   : "FAIL");
  };
  chns::run_simulation(cfg.scenario, cfg.scenario.params, cfg.strategy, opts);
  if (failures > 0) {
    std::printf("energy audit: %d dissipation violations\n", failures);
    return 1;
  }
  std::printf("energy audit: dissipation inequality holds on every "
              "undriven step\n");
  return 0;
}

int cmd_blocks(const chns::Config& cfg, const std::string& out_dir) {
  // Tiny fixed grid: exact condition numbers are dense computations.
  chns::TriMesh mesh = chns::build_rect_mesh(4, 2, cfg.scenario.lx,
                                             cfg.scenario.ly);
  chns::ScalarSpaceP1 s1 = chns::build_p1(mesh);
  chns::VectorSpaceP2 s2 = chns::build_p2vec(mesh);
  chns::SystemState st = chns::make_state(s1, s2, cfg.scenario.reactive);
  st.phi = chns::interpolate(s1, [&cfg](chns::Vec2 x) {
    return chns::initial_phase(cfg.scenario, x);
  });
  st.mu = chns::initial_potential(s1, s2, st.phi, cfg.scenario.params);
  for (auto& c : st.c) c = cfg.scenario.c_init;

  const std::vector<chns::DirichletBc> bcs =
      chns::realize_bcs(cfg.scenario, s1, s2, 1);
  chns::AssemblyFlags flags;
  flags.reactive = cfg.scenario.reactive;
  chns::BlockSystem sys =
      chns::assemble_jacobian(st, st, cfg.scenario.params, bcs, flags);
  chns::Blocks blocks = chns::extract_blocks(sys);

  std::printf("grid 4x2, %d vertices; unknown vector size %d\n",
              mesh.n_vertices(), sys.layout.size());
  std::printf("phase block  %5ld x %-5ld  nnz %6ld  cond1 %.6e\n",
              long(blocks.a_ch.rows()), long(blocks.a_ch.cols()),
              long(blocks.a_ch.nonZeros()), chns::cond1_exact(blocks.a_ch));
  std::printf("flow block   %5ld x %-5ld  nnz %6ld  cond1 %.6e\n",
              long(blocks.a_ns.rows()), long(blocks.a_ns.cols()),
              long(blocks.a_ns.nonZeros()), chns::cond1_exact(blocks.a_ns));
  std::printf("full matrix  %5ld x %-5ld  nnz %6ld  cond1 %.6e\n",
              long(sys.matrix.rows()), long(sys.matrix.cols()),
              long(sys.matrix.nonZeros()), chns::cond1_exact(sys.matrix));
  std::printf("coupling blocks: flow-into-phase nnz %ld, "
              "phase-into-flow nnz %ld\n",
              long(blocks.c_t.nonZeros()), long(blocks.c_i.nonZeros()));

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const auto dump = [&out_dir](const char* name, const chns::SpMat& m) {
      const std::string path = out_dir + "/" + name + ".mtx";
      std::ofstream out(path);
      out << "%%MatrixMarket matrix coordinate real general\n";
      out << m.rows() << " " << m.cols() << " " << m.nonZeros() << "\n";
      for (int k = 0; k < m.outerSize(); ++k)
        for (chns::SpMat::InnerIterator it(m, k); it; ++it) {
          char buf[64];
          std::snprintf(buf, sizeof(buf), "%ld %ld %.17e\n",
                        long(it.row() + 1), long(it.col() + 1), it.value());
          out << buf;
        }
      std::printf("wrote %s\n", path.c_str());
    };
    dump("phase_block", blocks.a_ch);
    dump("flow_block", blocks.a_ns);
    dump("full_matrix", sys.matrix);
  }
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CliArgs args;
  std::string err;
  if (!parse_args(argc, argv, args, err)) {
    std::cerr << "error: " << err << "\n\n";
    return usage(argv[0]);
  }

  try {
    const chns::Config cfg = load_config(args);
    if (args.command == "run") return cmd_run(cfg, args.out_dir);
    if (args.command == "preprocess") return cmd_preprocess(cfg, args.out_dir);
    if (args.command == "energy-audit")
      return cmd_energy_audit(cfg, args.out_dir);
    if (args.command == "blocks") return cmd_blocks(cfg, args.out_dir);
    std::cerr << "error: unknown command '" << args.command << "'\n\n";
    return usage(argv[0]);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
