// Residual and Jacobian assembly of the fully discrete two-phase system.
//
// Unknown ordering is (phi, mu, [c,] v, p): the phase block comes first so
// the leading index range [0, ch_size) is the Cahn-Hilliard subsystem and the
// trailing range [ch_size, size) the Navier-Stokes subsystem. Time levels are
// mixed exactly as the scheme prescribes; in particular the convective split
// uses the new-time mass flux in the first term and the old-time flux in the
// other two, and that asymmetry is load-bearing for the discrete energy
// dissipation, so it must not be rearranged.
//
// Dirichlet conditions are imposed by row replacement: the residual row
// becomes guess minus boundary value and the Jacobian row becomes an identity
// row, while columns stay untouched. Finite-difference probes of the Jacobian
// therefore remain exact on constrained rows.
//
// In preprocessing mode only the phase rows are assembled (momentum and
// continuity rows are exact zeros, velocity/pressure conditions are ignored)
// and the mobility is swapped for its preprocessing value; callers solve the
// leading block only.

#pragma once

#include <vector>

#include "chns/fespace.hpp"
#include "chns/linalg.hpp"
#include "chns/physics.hpp"

namespace chns {

enum class Field { phi, mu, c, v, p };

// Coefficient vectors for one time level. c stays empty unless the solute
// transport extension is active.
struct SystemState {
  const ScalarSpaceP1* scalar = nullptr;
  const VectorSpaceP2* vector = nullptr;
  std::vector<double> p, v, phi, mu, c;
  double time = 0.0;
};

SystemState make_state(const ScalarSpaceP1& scalar, const VectorSpaceP2& vector,
                       bool reactive);

struct AssemblyFlags {
  bool preprocessing = false;
  bool reactive = false;
};

struct DirichletBc {
  Field field = Field::phi;
  // Vertex index for scalar fields; interleaved vector dof (2*node+comp)
  // for the velocity.
  int index = -1;
  double value = 0.0;
};

// Flat-vector layout of the stacked unknowns.
struct UnknownLayout {
  int n_p1 = 0; // scalar dofs per field
  int n_p2 = 0; // velocity dofs (two per node)
  bool reactive = false;

  int phi_offset() const { return 0; }
  int mu_offset() const { return n_p1; }
  int c_offset() const { return 2 * n_p1; }
  int v_offset() const { return (reactive ? 3 : 2) * n_p1; }
  int p_offset() const { return v_offset() + n_p2; }
  int size() const { return p_offset() + n_p1; }
  int ch_size() const { return v_offset(); }
  int ns_size() const { return n_p2 + n_p1; }

  int global_of(Field f, int index) const;
};

UnknownLayout make_layout(const SystemState& state);

Vec pack_state(const UnknownLayout& layout, const SystemState& state);
void unpack_state(const UnknownLayout& layout, const Vec& x, SystemState& state);

// Jacobian with its Newton right-hand side (the negated residual) and the
// layout that names the block index ranges.
struct BlockSystem {
  SpMat matrix;
  Vec rhs;
  UnknownLayout layout;
};

// Diagonal blocks of the phase and flow subsystems plus the two coupling
// blocks: c_t collects the flow unknowns entering phase equations, c_i the
// phase unknowns entering flow equations.
struct Blocks {
  SpMat a_ch, a_ns, c_t, c_i;
};

Vec assemble_residual(const SystemState& old_state, const SystemState& guess,
                      const ModelParams& params,
                      const std::vector<DirichletBc>& bcs,
                      const AssemblyFlags& flags);

BlockSystem assemble_jacobian(const SystemState& old_state, const SystemState& guess,
                              const ModelParams& params,
                              const std::vector<DirichletBc>& bcs,
                              const AssemblyFlags& flags);

Blocks extract_blocks(const BlockSystem& system);

} // namespace chns
