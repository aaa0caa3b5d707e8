#include "chns/assembly.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace chns {

namespace {

bool all_finite(const std::vector<double>& u) {
  for (double v : u)
    if (!std::isfinite(v)) return false;
  return true;
}

void validate_state(const SystemState& s, bool reactive, const char* who) {
  if (s.scalar == nullptr || s.vector == nullptr ||
      s.scalar->mesh == nullptr || s.scalar->mesh != s.vector->mesh)
    throw std::invalid_argument(std::string(who) +
                                ": state spaces missing or on different meshes");
  const std::size_t n1 = std::size_t(s.scalar->n_dofs());
  const std::size_t n2 = std::size_t(s.vector->n_dofs());
  if (s.phi.size() != n1 || s.mu.size() != n1 || s.p.size() != n1 ||
      s.v.size() != n2)
    throw std::invalid_argument(std::string(who) + ": field sizes do not match spaces");
  if (reactive ? s.c.size() != n1 : !s.c.empty())
    throw std::invalid_argument(std::string(who) +
                                ": concentration present iff the reactive model is on");
  if (!all_finite(s.phi) || !all_finite(s.mu) || !all_finite(s.p) ||
      !all_finite(s.v) || !all_finite(s.c))
    throw std::runtime_error(std::string(who) + ": non-finite field coefficients");
}

struct QpData {
  std::array<double, 3> lam;
  std::array<double, 6> n2;                   // P2 shape values
  std::array<std::array<double, 3>, 6> dn2;   // P2 barycentric derivative rows
  double weight = 0.0;
};

std::vector<QpData> tabulate(const QuadratureRule& rule) {
  std::vector<QpData> q(rule.size());
  for (int k = 0; k < rule.size(); ++k) {
    q[k].lam = rule.bary[k];
    q[k].weight = rule.weight[k];
    p2_shapes(q[k].lam, q[k].n2);
    p2_shape_derivs(q[k].lam, q[k].dn2);
  }
  return q;
}

inline Eigen::Vector2d ev(Vec2 a) { return {a.x, a.y}; }

// Everything either assembly entry point needs; jac == nullptr skips the
// matrix work.
Vec assemble_internal(const SystemState& old_state, const SystemState& guess,
                      const ModelParams& prm, const std::vector<DirichletBc>& bcs,
                      const AssemblyFlags& flags,
                      std::vector<Eigen::Triplet<double>>* jac) {
  prm.validate();
  if (flags.preprocessing && flags.reactive)
    throw std::invalid_argument(
        "assemble: preprocessing mode excludes the transport equation");
  validate_state(old_state, flags.reactive, "assemble(old)");
  validate_state(guess, flags.reactive, "assemble(guess)");
  if (old_state.scalar->mesh != guess.scalar->mesh)
    throw std::invalid_argument("assemble: old and guess live on different meshes");

  const TriMesh& mesh = *guess.scalar->mesh;
  const UnknownLayout lay = make_layout(guess);
  const bool ns_active = !flags.preprocessing;

  Vec r = Vec::Zero(lay.size());
  if (jac) jac->reserve(std::size_t(mesh.n_triangles()) * 24 * 24 + lay.n_p1);

  const QuadratureRule& rule = quadrature(5);
  const std::vector<QpData> qps = tabulate(rule);

  const double eps = prm.epsilon;
  const double tau = prm.tau;
  const double one_m2d = 1.0 - 2.0 * prm.delta;
  // Momentum and solute rows always carry the physical mobility; only the
  // phase transport row swaps it in preprocessing mode.
  const double mob_eps = prm.mobility * eps;
  const double flux_coeff = ch_flux_coeff(prm, flags.preprocessing);

  const int nloc = (flags.reactive ? 24 : 21);
  const int c_base = 6;
  const int v_base = flags.reactive ? 9 : 6;
  const int p_base = v_base + 12;
  Eigen::Matrix<double, 24, 24> kloc;
  Eigen::Matrix<double, 24, 1> rloc;
  std::array<int, 24> loc2glob{};

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const TriGeom geom = tri_geom(mesh, t);
    const std::array<int, 3> iv = guess.scalar->cell_dofs(t);
    const std::array<int, 6> nodes = guess.vector->cell_nodes(t);

    for (int i = 0; i < 3; ++i) {
      loc2glob[std::size_t(i)] = lay.phi_offset() + iv[std::size_t(i)];
      loc2glob[std::size_t(3 + i)] = lay.mu_offset() + iv[std::size_t(i)];
      if (flags.reactive)
        loc2glob[std::size_t(c_base + i)] = lay.c_offset() + iv[std::size_t(i)];
      loc2glob[std::size_t(p_base + i)] = lay.p_offset() + iv[std::size_t(i)];
    }
    for (int a = 0; a < 6; ++a)
      for (int comp = 0; comp < 2; ++comp)
        loc2glob[std::size_t(v_base + 2 * a + comp)] =
            lay.v_offset() + VectorSpaceP2::dof_of(nodes[std::size_t(a)], comp);

    rloc.setZero();
    if (jac) kloc.setZero();

    // P1 gradients are constant on the triangle.
    const std::array<Eigen::Vector2d, 3> g = {
        ev(geom.grad_lambda[0]), ev(geom.grad_lambda[1]), ev(geom.grad_lambda[2])};
    Eigen::Vector2d grad_phi_new = Eigen::Vector2d::Zero();
    Eigen::Vector2d grad_mu_new = Eigen::Vector2d::Zero();
    Eigen::Vector2d grad_mu_old = Eigen::Vector2d::Zero();
    Eigen::Vector2d grad_c_new = Eigen::Vector2d::Zero();
    for (int i = 0; i < 3; ++i) {
      const int vi = iv[std::size_t(i)];
      grad_phi_new += guess.phi[std::size_t(vi)] * g[std::size_t(i)];
      grad_mu_new += guess.mu[std::size_t(vi)] * g[std::size_t(i)];
      grad_mu_old += old_state.mu[std::size_t(vi)] * g[std::size_t(i)];
      if (flags.reactive) grad_c_new += guess.c[std::size_t(vi)] * g[std::size_t(i)];
    }

    for (const QpData& qp : qps) {
      const double jxw = 2.0 * geom.area * qp.weight;

      double phi_old_q = 0.0, phi_new_q = 0.0, mu_new_q = 0.0, p_q = 0.0;
      double c_old_q = 0.0, c_new_q = 0.0;
      for (int i = 0; i < 3; ++i) {
        const int vi = iv[std::size_t(i)];
        const double li = qp.lam[std::size_t(i)];
        phi_old_q += old_state.phi[std::size_t(vi)] * li;
        phi_new_q += guess.phi[std::size_t(vi)] * li;
        mu_new_q += guess.mu[std::size_t(vi)] * li;
        p_q += guess.p[std::size_t(vi)] * li;
        if (flags.reactive) {
          c_old_q += old_state.c[std::size_t(vi)] * li;
          c_new_q += guess.c[std::size_t(vi)] * li;
        }
      }

      // P2 velocity values and gradients (rows are components).
      std::array<Eigen::Vector2d, 6> gn2;
      Eigen::Vector2d v_old_q = Eigen::Vector2d::Zero();
      Eigen::Vector2d v_new_q = Eigen::Vector2d::Zero();
      Eigen::Matrix2d grad_v_old = Eigen::Matrix2d::Zero();
      Eigen::Matrix2d grad_v_new = Eigen::Matrix2d::Zero();
      for (int a = 0; a < 6; ++a) {
        gn2[std::size_t(a)] = qp.dn2[std::size_t(a)][0] * g[0] +
                              qp.dn2[std::size_t(a)][1] * g[1] +
                              qp.dn2[std::size_t(a)][2] * g[2];
        const int node = nodes[std::size_t(a)];
        for (int comp = 0; comp < 2; ++comp) {
          const double co = old_state.v[std::size_t(VectorSpaceP2::dof_of(node, comp))];
          const double cn = guess.v[std::size_t(VectorSpaceP2::dof_of(node, comp))];
          v_old_q(comp) += co * qp.n2[std::size_t(a)];
          v_new_q(comp) += cn * qp.n2[std::size_t(a)];
          grad_v_old.row(comp) += co * gn2[std::size_t(a)].transpose();
          grad_v_new.row(comp) += cn * gn2[std::size_t(a)].transpose();
        }
      }
      const double div_v_new = grad_v_new.trace();
      const Eigen::Matrix2d sym_v_new = 0.5 * (grad_v_new + grad_v_new.transpose());

      const double rho_avg = 0.5 * prm.rho * (phi_old_q + phi_new_q + 2.0 * prm.delta);
      const double phit_new = fluid_fraction(prm, phi_new_q);
      const double drag_q = drag(prm, fluid_fraction(prm, phi_old_q));
      const Eigen::Vector2d u_star =
          prm.rho * (phi_old_q * v_new_q - mob_eps * grad_mu_new);
      const Eigen::Vector2d u_old =
          prm.rho * (phi_old_q * v_old_q - mob_eps * grad_mu_old);
      const double wc1 = convex_prime(prm, phi_new_q);
      const double we1 = concave_prime(prm, phi_old_q);
      const double wc2 = jac ? convex_second(prm, phi_new_q) : 0.0;
      const double q_src = flags.reactive ? reaction_q(phi_old_q) / eps : 0.0;
      const double rr = flags.reactive ? reaction_rate(prm, c_new_q) : 0.0;
      const double rrp =
          (flags.reactive && jac) ? reaction_rate_prime(prm, c_new_q) : 0.0;

      // Phase transport and potential rows.
      for (int i = 0; i < 3; ++i) {
        const double si = qp.lam[std::size_t(i)];
        const Eigen::Vector2d& gi = g[std::size_t(i)];
        rloc(i) += jxw * (((phi_new_q - phi_old_q) / tau) * si +
                          flux_coeff * grad_mu_new.dot(gi) -
                          phi_old_q * v_new_q.dot(gi) + q_src * rr * si);
        rloc(3 + i) += jxw * (mu_new_q * si - ((wc1 + we1) / eps) * si -
                              eps * grad_phi_new.dot(gi));
        if (flags.reactive) {
          const double store_new = (phi_new_q + prm.delta) * (c_new_q - prm.c_star);
          const double store_old = (phi_old_q + prm.delta) * (c_old_q - prm.c_star);
          rloc(c_base + i) +=
              jxw * (((store_new - store_old) / tau) * si +
                     mob_eps * (c_new_q - prm.c_star) * grad_mu_new.dot(gi) -
                     phi_old_q * (c_new_q - prm.c_star) * v_new_q.dot(gi) +
                     prm.diffusivity * (phi_old_q + prm.delta) * grad_c_new.dot(gi));
        }

        if (jac) {
          for (int j = 0; j < 3; ++j) {
            const double sj = qp.lam[std::size_t(j)];
            const Eigen::Vector2d& gj = g[std::size_t(j)];
            kloc(i, j) += jxw * (sj / tau) * si;
            kloc(i, 3 + j) += jxw * flux_coeff * gj.dot(gi);
            kloc(3 + i, j) += jxw * (-(wc2 / eps) * sj * si - eps * gj.dot(gi));
            kloc(3 + i, 3 + j) += jxw * sj * si;
            if (flags.reactive) {
              kloc(i, c_base + j) += jxw * q_src * rrp * sj * si;
              kloc(c_base + i, j) +=
                  jxw * ((c_new_q - prm.c_star) / tau) * sj * si;
              kloc(c_base + i, 3 + j) +=
                  jxw * mob_eps * (c_new_q - prm.c_star) * gj.dot(gi);
              kloc(c_base + i, c_base + j) +=
                  jxw * (((phi_new_q + prm.delta) / tau) * sj * si +
                         mob_eps * sj * grad_mu_new.dot(gi) -
                         phi_old_q * sj * v_new_q.dot(gi) +
                         prm.diffusivity * (phi_old_q + prm.delta) * gj.dot(gi));
            }
          }
          for (int b = 0; b < 6; ++b) {
            const double nb = qp.n2[std::size_t(b)];
            for (int s = 0; s < 2; ++s) {
              const int col = v_base + 2 * b + s;
              kloc(i, col) += jxw * (-phi_old_q * nb * gi(s));
              if (flags.reactive)
                kloc(c_base + i, col) +=
                    jxw * (-phi_old_q * (c_new_q - prm.c_star) * nb * gi(s));
            }
          }
        }
      }

      if (!ns_active) continue;

      // Momentum rows.
      for (int a = 0; a < 6; ++a) {
        const double na = qp.n2[std::size_t(a)];
        const Eigen::Vector2d& ga = gn2[std::size_t(a)];
        for (int rcomp = 0; rcomp < 2; ++rcomp) {
          const int row = v_base + 2 * a + rcomp;
          double m = 0.0;
          m += rho_avg * ((v_new_q(rcomp) - v_old_q(rcomp)) / tau) * na;
          m += 0.5 * (na * grad_v_old.row(rcomp).dot(u_star) +
                      v_old_q(rcomp) * ga.dot(u_star));
          m += 0.5 * na * grad_v_new.row(rcomp).dot(u_old);
          m -= 0.5 * v_new_q(rcomp) * ga.dot(u_old);
          m -= p_q * (phit_new * ga(rcomp) + one_m2d * grad_phi_new(rcomp) * na);
          m += 2.0 * prm.gamma * sym_v_new.row(rcomp).dot(ga);
          m += prm.rho * drag_q * v_new_q(rcomp) * na;
          m += prm.sigma * phi_old_q * na * grad_mu_new(rcomp);
          if (flags.reactive)
            m += 0.5 * prm.rho * q_src * rr * v_new_q(rcomp) * na;
          rloc(row) += jxw * m;

          if (jac) {
            for (int b = 0; b < 6; ++b) {
              const double nb = qp.n2[std::size_t(b)];
              const Eigen::Vector2d& gb = gn2[std::size_t(b)];
              for (int s = 0; s < 2; ++s) {
                const int col = v_base + 2 * b + s;
                double k = 0.0;
                if (s == rcomp) {
                  k += rho_avg * (nb / tau) * na;
                  k += 0.5 * na * gb.dot(u_old);
                  k -= 0.5 * nb * ga.dot(u_old);
                  k += prm.gamma * gb.dot(ga);
                  k += prm.rho * drag_q * nb * na;
                  if (flags.reactive) k += 0.5 * prm.rho * q_src * rr * nb * na;
                }
                k += 0.5 * prm.rho * phi_old_q * nb *
                     (na * grad_v_old(rcomp, s) + v_old_q(rcomp) * ga(s));
                k += prm.gamma * gb(rcomp) * ga(s);
                kloc(row, col) += jxw * k;
              }
            }
            for (int j = 0; j < 3; ++j) {
              const double sj = qp.lam[std::size_t(j)];
              const Eigen::Vector2d& gj = g[std::size_t(j)];
              kloc(row, p_base + j) +=
                  jxw * (-sj) *
                  (phit_new * ga(rcomp) + one_m2d * grad_phi_new(rcomp) * na);
              double kphi = 0.0;
              kphi += 0.5 * prm.rho * sj *
                      ((v_new_q(rcomp) - v_old_q(rcomp)) / tau) * na;
              kphi -= p_q * one_m2d * (sj * ga(rcomp) + gj(rcomp) * na);
              kloc(row, j) += jxw * kphi;
              double kmu = 0.0;
              kmu += 0.5 * (-prm.rho * mob_eps) *
                     (na * grad_v_old.row(rcomp).dot(gj) + v_old_q(rcomp) * ga.dot(gj));
              kmu += prm.sigma * phi_old_q * na * gj(rcomp);
              kloc(row, 3 + j) += jxw * kmu;
              if (flags.reactive)
                kloc(row, c_base + j) +=
                    jxw * 0.5 * prm.rho * q_src * rrp * sj * v_new_q(rcomp) * na;
            }
          }
        }
      }

      // Continuity rows.
      for (int i = 0; i < 3; ++i) {
        const double si = qp.lam[std::size_t(i)];
        rloc(p_base + i) +=
            jxw * (-si) * (phit_new * div_v_new + one_m2d * grad_phi_new.dot(v_new_q));
        if (jac) {
          for (int b = 0; b < 6; ++b) {
            const double nb = qp.n2[std::size_t(b)];
            const Eigen::Vector2d& gb = gn2[std::size_t(b)];
            for (int s = 0; s < 2; ++s)
              kloc(p_base + i, v_base + 2 * b + s) +=
                  jxw * (-si) * (phit_new * gb(s) + one_m2d * grad_phi_new(s) * nb);
          }
          for (int j = 0; j < 3; ++j) {
            const double sj = qp.lam[std::size_t(j)];
            const Eigen::Vector2d& gj = g[std::size_t(j)];
            kloc(p_base + i, j) += jxw * (-si) * one_m2d *
                                   (sj * div_v_new + gj.dot(v_new_q));
          }
        }
      }
    }

    // Scatter every local coupling of an active row, zeros included; the
    // sparsity pattern must depend on the mesh and flags only, never on the
    // current values, so cached symbolic factorizations stay valid across
    // Newton iterations.
    const int row_limit = ns_active ? nloc : 6;
    for (int i = 0; i < row_limit; ++i) {
      r(loc2glob[std::size_t(i)]) += rloc(i);
      if (jac)
        for (int j = 0; j < nloc; ++j)
          jac->emplace_back(loc2glob[std::size_t(i)], loc2glob[std::size_t(j)],
                            kloc(i, j));
    }
  }

  // The continuity rows have no pressure coupling, so the diagonal is given
  // an explicit structural zero; the zero-fill factorization needs the slot.
  if (jac && ns_active)
    for (int i = 0; i < lay.n_p1; ++i)
      jac->emplace_back(lay.p_offset() + i, lay.p_offset() + i, 0.0);

  // Dirichlet rows: residual is the value mismatch, matrix row the identity.
  for (const DirichletBc& bc : bcs) {
    if (flags.preprocessing && (bc.field == Field::v || bc.field == Field::p))
      continue;
    const int gid = lay.global_of(bc.field, bc.index);
    double current = 0.0;
    switch (bc.field) {
      case Field::phi: current = guess.phi[std::size_t(bc.index)]; break;
      case Field::mu: current = guess.mu[std::size_t(bc.index)]; break;
      case Field::c: current = guess.c[std::size_t(bc.index)]; break;
      case Field::v: current = guess.v[std::size_t(bc.index)]; break;
      case Field::p: current = guess.p[std::size_t(bc.index)]; break;
    }
    r(gid) = current - bc.value;
  }

  return r;
}

std::vector<bool> dirichlet_row_mask(const UnknownLayout& lay,
                                     const std::vector<DirichletBc>& bcs,
                                     const AssemblyFlags& flags) {
  std::vector<bool> mask(std::size_t(lay.size()), false);
  for (const DirichletBc& bc : bcs) {
    if (flags.preprocessing && (bc.field == Field::v || bc.field == Field::p))
      continue;
    mask[std::size_t(lay.global_of(bc.field, bc.index))] = true;
  }
  return mask;
}

} // namespace

SystemState make_state(const ScalarSpaceP1& scalar, const VectorSpaceP2& vector,
                       bool reactive) {
  SystemState s;
  s.scalar = &scalar;
  s.vector = &vector;
  const std::size_t n1 = std::size_t(scalar.n_dofs());
  s.p.assign(n1, 0.0);
  s.phi.assign(n1, 0.0);
  s.mu.assign(n1, 0.0);
  s.v.assign(std::size_t(vector.n_dofs()), 0.0);
  if (reactive) s.c.assign(n1, 0.0);
  return s;
}

int UnknownLayout::global_of(Field f, int index) const {
  switch (f) {
    case Field::phi: return phi_offset() + index;
    case Field::mu: return mu_offset() + index;
    case Field::c:
      if (!reactive)
        throw std::invalid_argument("UnknownLayout: no concentration block");
      return c_offset() + index;
    case Field::v: return v_offset() + index;
    case Field::p: return p_offset() + index;
  }
  throw std::invalid_argument("UnknownLayout: unknown field");
}

UnknownLayout make_layout(const SystemState& state) {
  if (state.scalar == nullptr || state.vector == nullptr)
    throw std::invalid_argument("make_layout: state has no spaces");
  UnknownLayout lay;
  lay.n_p1 = state.scalar->n_dofs();
  lay.n_p2 = state.vector->n_dofs();
  lay.reactive = !state.c.empty();
  return lay;
}

Vec pack_state(const UnknownLayout& lay, const SystemState& s) {
  Vec x(lay.size());
  for (int i = 0; i < lay.n_p1; ++i) {
    x(lay.phi_offset() + i) = s.phi[std::size_t(i)];
    x(lay.mu_offset() + i) = s.mu[std::size_t(i)];
    x(lay.p_offset() + i) = s.p[std::size_t(i)];
    if (lay.reactive) x(lay.c_offset() + i) = s.c[std::size_t(i)];
  }
  for (int d = 0; d < lay.n_p2; ++d) x(lay.v_offset() + d) = s.v[std::size_t(d)];
  return x;
}

void unpack_state(const UnknownLayout& lay, const Vec& x, SystemState& s) {
  if (x.size() != lay.size())
    throw std::invalid_argument("unpack_state: vector length mismatch");
  for (int i = 0; i < lay.n_p1; ++i) {
    s.phi[std::size_t(i)] = x(lay.phi_offset() + i);
    s.mu[std::size_t(i)] = x(lay.mu_offset() + i);
    s.p[std::size_t(i)] = x(lay.p_offset() + i);
    if (lay.reactive) s.c[std::size_t(i)] = x(lay.c_offset() + i);
  }
  for (int d = 0; d < lay.n_p2; ++d) s.v[std::size_t(d)] = x(lay.v_offset() + d);
}

Vec assemble_residual(const SystemState& old_state, const SystemState& guess,
                      const ModelParams& params,
                      const std::vector<DirichletBc>& bcs,
                      const AssemblyFlags& flags) {
  return assemble_internal(old_state, guess, params, bcs, flags, nullptr);
}

BlockSystem assemble_jacobian(const SystemState& old_state, const SystemState& guess,
                              const ModelParams& params,
                              const std::vector<DirichletBc>& bcs,
                              const AssemblyFlags& flags) {
  std::vector<Eigen::Triplet<double>> trips;
  Vec r = assemble_internal(old_state, guess, params, bcs, flags, &trips);

  BlockSystem sys;
  sys.layout = make_layout(guess);
  const std::vector<bool> mask = dirichlet_row_mask(sys.layout, bcs, flags);

  std::vector<Eigen::Triplet<double>> kept;
  kept.reserve(trips.size());
  for (const auto& tr : trips)
    if (!mask[std::size_t(tr.row())]) kept.push_back(tr);
  for (int i = 0; i < sys.layout.size(); ++i)
    if (mask[std::size_t(i)]) kept.emplace_back(i, i, 1.0);

  sys.matrix.resize(sys.layout.size(), sys.layout.size());
  sys.matrix.setFromTriplets(kept.begin(), kept.end());
  sys.matrix.makeCompressed();
  sys.rhs = -r;
  return sys;
}

Blocks extract_blocks(const BlockSystem& system) {
  const int nch = system.layout.ch_size();
  const int nns = system.layout.ns_size();
  Blocks b;
  b.a_ch = system.matrix.topLeftCorner(nch, nch);
  b.c_t = system.matrix.topRightCorner(nch, nns);
  b.c_i = system.matrix.bottomLeftCorner(nns, nch);
  b.a_ns = system.matrix.bottomRightCorner(nns, nns);
  return b;
}

} // namespace chns
