#include "stokeslab/block_tri.hpp"

#include <stdexcept>
#include <vector>

#include "stokeslab/counters.hpp"

namespace stokeslab {

void BlockTriConfig::validate() const {
  if (cycles < 1) throw std::invalid_argument("bt.cycles must be >= 1");
  if (!(omega_p > 0.0 && omega_p < 2.0)) throw std::invalid_argument("bt.omega_p must be in (0, 2)");
  if (!(omega_u > 0.0 && omega_u < 2.0)) throw std::invalid_argument("bt.omega_u must be in (0, 2)");
  if (nu1 < 0 || nu2 < 0 || nu1 + nu2 == 0) {
    throw std::invalid_argument("bt inner cycle needs at least one sweep");
  }
}

BlockTriangular::BlockTriangular(const StokesOperators& ops, const BlockTriConfig& cfg)
    : ops_(&ops), cfg_(cfg) {
  cfg_.validate();
  level_count(ops.grid.n_elem(), cfg_.coarsest_n);
  ScalarMGConfig mc{cfg_.nu1, cfg_.nu2, cfg_.omega_p, cfg_.coarsest_n};
  ScalarMGConfig lc{cfg_.nu1, cfg_.nu2, cfg_.omega_u, cfg_.coarsest_n};
  mass_mg_.emplace(ScalarMGHierarchy::pressure_mass(ops.grid, ops.nu, mc));
  lap_mg_.emplace(ScalarMGHierarchy::velocity_laplacian(ops.grid, ops.nu, lc));
  const int cycles = cfg_.cycles;
  const ScalarMGHierarchy* m = &*mass_mg_;
  const ScalarMGHierarchy* l = &*lap_mg_;
  mass_solve_ = [m, cycles](std::span<const double> b, std::span<double> x) {
    m->solve(b, x, cycles);
  };
  laplace_solve_ = [l, cycles](std::span<const double> b, std::span<double> x) {
    l->solve(b, x, cycles);
  };
}

BlockTriangular::BlockTriangular(const StokesOperators& ops, ScalarSolve mass_solve,
                                 ScalarSolve laplace_solve)
    : ops_(&ops), mass_solve_(std::move(mass_solve)), laplace_solve_(std::move(laplace_solve)) {
  if (!mass_solve_ || !laplace_solve_) {
    throw std::invalid_argument("BlockTriangular: inner solves must be callable");
  }
}

void BlockTriangular::apply(const BlockVector& r, BlockVector& z) const {
  const auto& ops = *ops_;
  const std::size_t nv = ops.grid.q2_size();
  if (r.n_vel() != nv || r.n_p() != ops.grid.q1_size() || !r.same_shape(z)) {
    throw std::invalid_argument("BlockTriangular::apply: shape mismatch");
  }
  z.fill(0.0);

  std::vector<double> rhs_p(r.n_p());
  const auto rp = r.p();
  for (std::size_t k = 0; k < rhs_p.size(); ++k) rhs_p[k] = -rp[k];
  record(kernel::kArrayScale, rhs_p.size(), rhs_p.size(), rhs_p.size());
  mass_solve_(rhs_p, z.p());

  // r_u - B^T dp, then one Laplacian solve per component.
  std::vector<double> btx(nv), bty(nv), rhs_u(nv);
  ops.BT.apply(z.p(), btx, bty);
  for (int c = 0; c < 2; ++c) {
    sub(r.u(c), std::span<const double>(c == 0 ? btx : bty), std::span<double>(rhs_u));
    laplace_solve_(rhs_u, z.u(c));
  }
  remove_pressure_mean(z);
}

BlockVector block_tri_apply(const BlockTriangular& pc, const BlockVector& r) {
  BlockVector z(r.n_vel(), r.n_p());
  pc.apply(r, z);
  return z;
}

}  // namespace stokeslab
