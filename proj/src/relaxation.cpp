#include "stokeslab/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "stokeslab/counters.hpp"

namespace stokeslab {

namespace {

// out = d .* x
void diag_scale(const std::vector<double>& d, std::span<const double> x, std::span<double> out) {
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = d[k] * x[k];
  record(kernel::kDiagScale, 2 * x.size(), x.size(), x.size());
}

void scale_span(double a, std::span<double> x) {
  for (double& v : x) v *= a;
  record(kernel::kArrayScale, x.size(), x.size(), x.size());
}

}  // namespace

void Relaxation::smooth(const BlockVector& b, BlockVector& x) const {
  const BlockVector r = ops_->residual(b, x);
  BlockVector delta(x.n_vel(), x.n_p());
  correction(r, delta);
  add_inplace(delta, x);
}

SchurOperator::SchurOperator(const StokesOperators& ops, double t) : ops_(&ops), t_(t) {
  if (!(t > 0.0)) throw std::invalid_argument("SchurOperator: t must be positive");
  const auto d = ops.L.diagonal();
  dinv_t_.resize(d.size());
  for (std::size_t k = 0; k < d.size(); ++k) {
    if (d[k] == 0.0) {
      throw SingularDiagonalError("diag(L) has a zero entry at velocity row " + std::to_string(k));
    }
    dinv_t_[k] = 1.0 / (t * d[k]);
  }
  diag_.assign(ops.grid.q1_size(), 0.0);
  const auto node = q2_stencil(DofClass::Node);
  const auto& grid = ops.grid;
  for (std::size_t r = 0; r < diag_.size(); ++r) {
    const auto pd = grid.pressure_dof(r);
    double s = 0.0;
    for (int comp = 0; comp < 2; ++comp) {
      const auto row = ops.B.row(comp, r);
      for (std::size_t k = 0; k < node.size(); ++k) {
        const int a = 2 * pd.i + node[k].da;
        const int b = 2 * pd.j + node[k].db;
        if (!grid.lattice_valid(a, b) || row[k] == 0.0) continue;
        s += row[k] * row[k] * dinv_t_[grid.lattice_offset(a, b)];
      }
    }
    diag_[r] = -s;
  }
}

void SchurOperator::apply(std::span<const double> p, std::span<double> out) const {
  const std::size_t n = ops_->grid.q2_size();
  std::vector<double> gx(n), gy(n);
  ops_->BT.apply(p, gx, gy);
  diag_scale(dinv_t_, gx, gx);
  diag_scale(dinv_t_, gy, gy);
  ops_->B.apply(gx, gy, out);
  scale_span(-1.0, out);
}

void weighted_jacobi_pressure(const SchurOperator& s, std::span<const double> rhs,
                              std::span<double> dp, double omega, int sweeps) {
  const std::size_t m = s.size();
  if (rhs.size() != m || dp.size() != m) {
    throw std::invalid_argument("weighted_jacobi_pressure: size mismatch");
  }
  if (sweeps < 0) throw std::invalid_argument("weighted_jacobi_pressure: negative sweep count");
  const auto& d = s.diagonal();
  for (double v : d) {
    if (v == 0.0) throw SingularDiagonalError("diag(S) has a zero entry");
  }
  std::vector<double> sp(m);
  for (int it = 0; it < sweeps; ++it) {
    s.apply(dp, sp);
    for (std::size_t k = 0; k < m; ++k) dp[k] += omega * (rhs[k] - sp[k]) / d[k];
    record(kernel::kWeightedJacobi, 2 * m, m, 2 * m);
  }
}

void BSConfig::validate() const {
  if (!(t > 0.0)) throw std::invalid_argument("bs.t must be > 0");
  if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("bs.omega must be in (0, 1]");
  if (!(jacobi_omega > 0.0 && jacobi_omega < 2.0)) {
    throw std::invalid_argument("bs.jacobi_omega must be in (0, 2)");
  }
  if (jacobi_sweeps < 1) throw std::invalid_argument("bs.jacobi_sweeps must be >= 1");
}

void UzawaConfig::validate() const {
  if (!(t > 0.0)) throw std::invalid_argument("uzawa.t must be > 0");
  if (!(jacobi_omega > 0.0 && jacobi_omega < 2.0)) {
    throw std::invalid_argument("uzawa.jacobi_omega must be in (0, 2)");
  }
  if (jacobi_sweeps < 1) throw std::invalid_argument("uzawa.jacobi_sweeps must be >= 1");
}

BraessSarazin::BraessSarazin(const StokesOperators& ops, const BSConfig& cfg, SchurSolver solver)
    : Relaxation(ops), cfg_(cfg), schur_(ops, cfg.t), solver_(std::move(solver)) {
  cfg_.validate();
  if (!solver_) {
    const double w = cfg_.jacobi_omega;
    const int sweeps = cfg_.jacobi_sweeps;
    solver_ = [w, sweeps](const SchurOperator& s, std::span<const double> rhs,
                          std::span<double> dp) { weighted_jacobi_pressure(s, rhs, dp, w, sweeps); };
  }
}

void BraessSarazin::correction(const BlockVector& r, BlockVector& delta) const {
  const auto& ops = operators();
  const std::size_t m = r.n_p();
  const auto& dinv = schur_.scaled_inverse_diagonal();

  // S dp = r_p - (1/t) B D^{-1} r_u
  diag_scale(dinv, r.ux(), delta.ux());
  diag_scale(dinv, r.uy(), delta.uy());
  std::vector<double> rhs(m);
  ops.B.apply(delta.ux(), delta.uy(), rhs);
  sub(r.p(), rhs, rhs);
  auto dp = delta.p();
  std::fill(dp.begin(), dp.end(), 0.0);
  solver_(schur_, rhs, dp);

  // du = (1/t) D^{-1} (r_u - B^T dp)
  const std::size_t n = r.n_vel();
  std::vector<double> gx(n), gy(n);
  ops.BT.apply(dp, gx, gy);
  sub(r.ux(), gx, gx);
  sub(r.uy(), gy, gy);
  diag_scale(dinv, gx, delta.ux());
  diag_scale(dinv, gy, delta.uy());
  if (cfg_.omega != 1.0) scale_inplace(cfg_.omega, delta);
}

SchurUzawa::SchurUzawa(const StokesOperators& ops, const UzawaConfig& cfg, SchurSolver solver)
    : Relaxation(ops), cfg_(cfg), schur_(ops, cfg.t), solver_(std::move(solver)) {
  cfg_.validate();
  if (!solver_) {
    const double w = cfg_.jacobi_omega;
    const int sweeps = cfg_.jacobi_sweeps;
    solver_ = [w, sweeps](const SchurOperator& s, std::span<const double> rhs,
                          std::span<double> dp) { weighted_jacobi_pressure(s, rhs, dp, w, sweeps); };
  }
}

void SchurUzawa::correction(const BlockVector& r, BlockVector& delta) const {
  const auto& ops = operators();
  const auto& dinv = schur_.scaled_inverse_diagonal();
  diag_scale(dinv, r.ux(), delta.ux());
  diag_scale(dinv, r.uy(), delta.uy());
  // S dp = r_p - B du
  std::vector<double> rhs(r.n_p());
  ops.B.apply(delta.ux(), delta.uy(), rhs);
  sub(r.p(), rhs, rhs);
  auto dp = delta.p();
  std::fill(dp.begin(), dp.end(), 0.0);
  solver_(schur_, rhs, dp);
}

BlockVector braess_sarazin_sweep(const StokesOperators& ops, const BlockVector& r,
                                 const BSConfig& cfg) {
  BraessSarazin bs(ops, cfg);
  BlockVector d(r.n_vel(), r.n_p());
  bs.correction(r, d);
  return d;
}

BlockVector schur_uzawa_sweep(const StokesOperators& ops, const BlockVector& r,
                              const UzawaConfig& cfg) {
  SchurUzawa uz(ops, cfg);
  BlockVector d(r.n_vel(), r.n_p());
  uz.correction(r, d);
  return d;
}

}  // namespace stokeslab
