#include "chns/output.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace chns {

namespace {

constexpr const char* kCsvHeader =
    "step,time,kinetic,dw_energy,grad_energy,total,visc_diss,drag_diss,"
    "ch_diss,solid_area";

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17e", x);
  return buf;
}

void write_scalar_field(std::ofstream& out, const char* name,
                        const std::vector<double>& u, int n) {
  out << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
  for (int i = 0; i < n; ++i) out << fmt(u[std::size_t(i)]) << "\n";
}

} // namespace

void write_vtk(const SystemState& state, const ModelParams& prm,
               const std::string& path) {
  if (state.scalar == nullptr || state.vector == nullptr)
    throw std::invalid_argument("state spaces not set");
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  const TriMesh& mesh = *state.scalar->mesh;
  const int nv = mesh.n_vertices();
  const int nt = mesh.n_triangles();

  out << "# vtk DataFile Version 3.0\n";
  out << "two-phase flow snapshot, time " << fmt(state.time) << "\n";
  out << "ASCII\nDATASET UNSTRUCTURED_GRID\n";

  out << "POINTS " << nv << " double\n";
  for (const Vec2& x : mesh.vertex)
    out << fmt(x.x) << " " << fmt(x.y) << " " << fmt(0.0) << "\n";

  out << "CELLS " << nt << " " << 4 * nt << "\n";
  for (const std::array<int, 3>& t : mesh.tri)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << nt << "\n";
  for (int t = 0; t < nt; ++t) out << "5\n";

  out << "POINT_DATA " << nv << "\n";
  write_scalar_field(out, "phi", state.phi, nv);
  write_scalar_field(out, "mu", state.mu, nv);
  write_scalar_field(out, "p", state.p, nv);

  // The first 2*nv velocity coefficients are the vertex values.
  out << "VECTORS velocity double\n";
  for (int i = 0; i < nv; ++i)
    out << fmt(state.v[std::size_t(2 * i)]) << " "
        << fmt(state.v[std::size_t(2 * i + 1)]) << " " << fmt(0.0) << "\n";

  out << "VECTORS w double\n";
  for (int i = 0; i < nv; ++i) {
    const double frac = fluid_fraction(prm, state.phi[std::size_t(i)]);
    out << fmt(frac * state.v[std::size_t(2 * i)]) << " "
        << fmt(frac * state.v[std::size_t(2 * i + 1)]) << " " << fmt(0.0)
        << "\n";
  }

  if (!state.c.empty()) write_scalar_field(out, "c", state.c, nv);

  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

void write_energy_csv(const std::vector<EnergyRow>& rows,
                      const std::string& path) {
  std::ofstream out(path);
  if (!out)
    throw std::runtime_error("cannot open '" + path + "' for writing");
  out << kCsvHeader << "\n";
  for (const EnergyRow& r : rows) {
    const EnergyReport& e = r.energy;
    out << r.step << "," << fmt(e.time) << "," << fmt(e.kinetic) << ","
        << fmt(e.dw_energy) << "," << fmt(e.grad_energy) << "," << fmt(e.total)
        << "," << fmt(e.visc_dissipation) << "," << fmt(e.drag_dissipation)
        << "," << fmt(e.ch_dissipation) << "," << fmt(r.solid_area) << "\n";
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<EnergyRow> read_energy_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    throw std::runtime_error("'" + path + "' is not an energy log");

  std::vector<EnergyRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double x = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0')
        throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                 ": bad number '" + cell + "'");
      vals.push_back(x);
    }
    if (vals.size() != 10)
      throw std::runtime_error(path + ":" + std::to_string(line_no) +
                               ": expected 10 columns");
    EnergyRow r;
    r.step = int(vals[0]);
    r.energy.time = vals[1];
    r.energy.kinetic = vals[2];
    r.energy.dw_energy = vals[3];
    r.energy.grad_energy = vals[4];
    r.energy.total = vals[5];
    r.energy.visc_dissipation = vals[6];
    r.energy.drag_dissipation = vals[7];
    r.energy.ch_dissipation = vals[8];
    r.solid_area = vals[9];
    rows.push_back(r);
  }
  return rows;
}

} // namespace chns
