// File emission: legacy ASCII VTK snapshots and the CSV energy log. Both
// formats are plain text with every floating-point number printed in full
// double precision scientific notation, so written files are bit-stable
// across runs and the CSV round-trips exactly.
#pragma once

#include <string>
#include <vector>

#include "chns/driver.hpp"

namespace chns {

// One line of the energy log; time lives inside the report.
struct EnergyRow {
  int step = 0;
  EnergyReport energy;
  double solid_area = 0.0;
};

// Unstructured-grid snapshot with point data: phi, mu, p, velocity (third
// component padded with zero), the conserved flux w = (effective fluid
// fraction) * velocity, and c when the state carries it. Throws
// std::runtime_error when the path cannot be written.
void write_vtk(const SystemState& state, const ModelParams& prm,
               const std::string& path);

// Header:
// step,time,kinetic,dw_energy,grad_energy,total,visc_diss,drag_diss,ch_diss,solid_area
void write_energy_csv(const std::vector<EnergyRow>& rows,
                      const std::string& path);
// Rejects files whose header does not match; numbers round-trip bitwise.
std::vector<EnergyRow> read_energy_csv(const std::string& path);

} // namespace chns
