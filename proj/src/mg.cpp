#include "stokeslab/mg.hpp"

#include <stdexcept>

#include "stokeslab/counters.hpp"

namespace stokeslab {

const char* to_string(RelaxationKind k) {
  switch (k) {
    case RelaxationKind::BS: return "bs";
    case RelaxationKind::Vanka: return "vanka";
    case RelaxationKind::VankaSimple: return "vanka-simple";
    case RelaxationKind::Uzawa: return "uzawa";
  }
  return "?";
}

RelaxationKind parse_relaxation(const std::string& s) {
  if (s == "bs") return RelaxationKind::BS;
  if (s == "vanka") return RelaxationKind::Vanka;
  if (s == "vanka-simple") return RelaxationKind::VankaSimple;
  if (s == "uzawa") return RelaxationKind::Uzawa;
  throw std::invalid_argument("unknown relaxation '" + s + "' (expected bs, vanka, uzawa)");
}

int level_count(int n_fine, int coarsest_n) {
  if (coarsest_n < 1) throw std::invalid_argument("mg.coarsest_n must be >= 1");
  if (n_fine < coarsest_n) {
    throw std::invalid_argument("grid N=" + std::to_string(n_fine) + " is coarser than mg.coarsest_n=" +
                                std::to_string(coarsest_n));
  }
  int levels = 1;
  int n = n_fine;
  while (n > coarsest_n) {
    if (n % 2 != 0) break;
    n /= 2;
    ++levels;
  }
  if (n != coarsest_n) {
    throw std::invalid_argument("N=" + std::to_string(n_fine) +
                                " is not a power-of-two multiple of mg.coarsest_n=" +
                                std::to_string(coarsest_n));
  }
  return levels;
}

void MGConfig::validate(int n_fine) const {
  if (nu1 < 0 || nu2 < 0) throw std::invalid_argument("mg.nu1 and mg.nu2 must be >= 0");
  if (coarse_sweeps < 1) throw std::invalid_argument("mg.coarse_sweeps must be >= 1");
  level_count(n_fine, coarsest_n);
  bs.validate();
  uzawa.validate();
  vanka.validate();
}

std::unique_ptr<Relaxation> make_relaxation(const StokesOperators& ops, const MGConfig& cfg) {
  switch (cfg.relaxation) {
    case RelaxationKind::BS: return std::make_unique<BraessSarazin>(ops, cfg.bs);
    case RelaxationKind::Uzawa: return std::make_unique<SchurUzawa>(ops, cfg.uzawa);
    case RelaxationKind::Vanka: {
      auto v = cfg.vanka;
      v.mode = VankaMode::Tuned;
      return std::make_unique<Vanka>(ops, v);
    }
    case RelaxationKind::VankaSimple: {
      auto v = cfg.vanka;
      v.mode = VankaMode::Simple;
      return std::make_unique<Vanka>(ops, v);
    }
  }
  throw std::invalid_argument("unknown relaxation kind");
}

CoarseDirectSolver::CoarseDirectSolver(const StokesOperators& ops) {
  const std::size_t s = ops.size();
  const std::size_t p0 = 2 * ops.grid.q2_size();
  Eigen::MatrixXd a(s, s);
  for (std::size_t i = 0; i < s; ++i)
    for (std::size_t j = 0; j < s; ++j) a(i, j) = ops.entry(i, j);
  for (std::size_t i = p0; i < s; ++i)
    for (std::size_t j = p0; j < s; ++j) a(i, j) += 1.0;
  lu_.compute(a);
}

void CoarseDirectSolver::solve(const BlockVector& b, BlockVector& x) const {
  const Eigen::Map<const Eigen::VectorXd> bb(b.data().data(), b.size());
  const Eigen::VectorXd sol = lu_.solve(bb);
  for (std::size_t k = 0; k < x.size(); ++k) x[k] = sol[k];
  const std::uint64_t s = b.size();
  record(kernel::kCoarseSolve, s * s + s, s, 2 * s * s);
}

namespace {

std::vector<StructuredGrid> grid_ladder(const StructuredGrid& fine, int coarsest_n) {
  const int levels = level_count(fine.n_elem(), coarsest_n);
  std::vector<StructuredGrid> grids;
  int n = fine.n_elem();
  for (int l = levels - 1; l >= 0; --l) {
    grids.insert(grids.begin(), StructuredGrid(n, l));
    n /= 2;
  }
  return grids;
}

}  // namespace

MGHierarchy::MGHierarchy(const StructuredGrid& fine, double nu, const MGConfig& cfg) : cfg_(cfg) {
  cfg_.validate(fine.n_elem());
  const auto grids = grid_ladder(fine, cfg_.coarsest_n);
  const int levels = static_cast<int>(grids.size());
  for (int l = 0; l < levels; ++l) {
    ops_.push_back(std::make_unique<StokesOperators>(assemble_operators(grids[l], nu)));
    if (l + 1 < levels) interp_.push_back(std::make_unique<Interpolation>(grids[l], true));
  }
  for (int l = 0; l < levels; ++l) {
    const bool need = l > 0 || cfg_.coarse_solver == CoarseSolverKind::Sweeps;
    relax_.push_back(need ? make_relaxation(*ops_[l], cfg_) : nullptr);
  }
  if (cfg_.coarse_solver == CoarseSolverKind::LU) coarse_.emplace(*ops_[0]);
}

void MGHierarchy::coarse_solve(const BlockVector& b, BlockVector& x) const {
  if (coarse_) {
    coarse_->solve(b, x);
    return;
  }
  const auto& r = *relax_[0];
  for (int k = 0; k < cfg_.coarse_sweeps; ++k) r.smooth(b, x);
  last_coarse_sweeps_ = cfg_.coarse_sweeps;
}

void MGHierarchy::vcycle(int l, const BlockVector& b, BlockVector& x) const {
  if (l < 0 || l >= num_levels()) throw std::out_of_range("vcycle: level out of range");
  if (l == 0) {
    coarse_solve(b, x);
    return;
  }
  const auto& ops = *ops_[l];
  const auto& relax = *relax_[l];
  for (int k = 0; k < cfg_.nu1; ++k) relax.smooth(b, x);
  const BlockVector r = ops.residual(b, x);
  const auto& P = *interp_[l - 1];
  const BlockVector rc = P.restrict(r);
  BlockVector xc(rc.n_vel(), rc.n_p());
  vcycle(l - 1, rc, xc);
  add_inplace(P.prolong(xc), x);
  for (int k = 0; k < cfg_.nu2; ++k) relax.smooth(b, x);
}

void MGHierarchy::apply(const BlockVector& r, BlockVector& z) const {
  z.fill(0.0);
  vcycle(finest(), r, z);
  remove_pressure_mean(z);
}

// Scalar hierarchy.

ScalarMGHierarchy ScalarMGHierarchy::velocity_laplacian(const StructuredGrid& fine, double nu,
                                                        const ScalarMGConfig& cfg) {
  ScalarMGHierarchy h;
  h.cfg_ = cfg;
  const auto grids = grid_ladder(fine, cfg.coarsest_n);
  for (std::size_t l = 0; l < grids.size(); ++l) {
    Level lv{grids[l], std::nullopt, std::nullopt, {}, nullptr};
    lv.L.emplace(assemble_operators(grids[l], nu).L);
    if (l + 1 < grids.size()) lv.to_finer = std::make_unique<Interpolation>(grids[l], true);
    h.levels_.push_back(std::move(lv));
  }
  h.finalize();
  return h;
}

ScalarMGHierarchy ScalarMGHierarchy::pressure_mass(const StructuredGrid& fine, double nu,
                                                   const ScalarMGConfig& cfg) {
  ScalarMGHierarchy h;
  h.cfg_ = cfg;
  const auto grids = grid_ladder(fine, cfg.coarsest_n);
  for (std::size_t l = 0; l < grids.size(); ++l) {
    Level lv{grids[l], std::nullopt, std::nullopt, {}, nullptr};
    lv.M.emplace(assemble_raw_operators(grids[l], nu).M);
    lv.M->scale(1.0 / nu);
    if (l + 1 < grids.size()) lv.to_finer = std::make_unique<Interpolation>(grids[l], false);
    h.levels_.push_back(std::move(lv));
  }
  h.finalize();
  return h;
}

void ScalarMGHierarchy::finalize() {
  if (cfg_.nu1 < 0 || cfg_.nu2 < 0) throw std::invalid_argument("scalar MG: negative sweep count");
  if (!(cfg_.omega > 0.0 && cfg_.omega < 2.0)) {
    throw std::invalid_argument("scalar MG: Jacobi weight must be in (0, 2)");
  }
  for (auto& lv : levels_) {
    lv.inv_diag = lv.L ? lv.L->diagonal() : lv.M->diagonal();
    for (double& d : lv.inv_diag) {
      if (d == 0.0) throw SingularDiagonalError("scalar MG: zero diagonal entry");
      d = 1.0 / d;
    }
  }
  const auto& c = levels_.front();
  const std::size_t s = size(0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(s, s);
  const EntryVisitor fill = [&](std::size_t r, std::size_t col, double v) { a(r, col) += v; };
  if (c.L) c.L->for_each_entry(fill);
  else c.M->for_each_entry(fill);
  coarse_lu_.compute(a);
}

std::size_t ScalarMGHierarchy::size(int l) const {
  const auto& lv = levels_.at(l);
  return lv.L ? lv.grid.q2_size() : lv.grid.q1_size();
}

void ScalarMGHierarchy::apply_operator(int l, std::span<const double> x, std::span<double> y) const {
  const auto& lv = levels_.at(l);
  if (lv.L) lv.L->apply(x, y);
  else lv.M->apply(x, y);
}

void ScalarMGHierarchy::vcycle(int l, std::span<const double> b, std::span<double> x) const {
  const std::size_t s = size(l);
  if (l == 0) {
    const Eigen::Map<const Eigen::VectorXd> bb(b.data(), s);
    const Eigen::VectorXd sol = coarse_lu_.solve(bb);
    for (std::size_t k = 0; k < s; ++k) x[k] = sol[k];
    record(kernel::kCoarseSolve, s * s + s, s, 2 * s * s);
    return;
  }
  const auto& lv = levels_[l];
  std::vector<double> ax(s);
  auto jacobi = [&]() {
    apply_operator(l, x, ax);
    for (std::size_t k = 0; k < s; ++k) x[k] += cfg_.omega * lv.inv_diag[k] * (b[k] - ax[k]);
    record(kernel::kScalarJacobi, 2 * s, s, 2 * s);
  };
  for (int k = 0; k < cfg_.nu1; ++k) jacobi();
  apply_operator(l, x, ax);
  std::vector<double> r(s);
  sub(b, ax, r);
  const auto& P = *levels_[l - 1].to_finer;
  const std::size_t sc = size(l - 1);
  std::vector<double> rc(sc), xc(sc, 0.0), corr(s);
  if (lv.L) P.restrict_q2(r, rc);
  else P.restrict_q1(r, rc);
  vcycle(l - 1, rc, xc);
  if (lv.L) P.prolong_q2(xc, corr);
  else P.prolong_q1(xc, corr);
  add_inplace(std::span<const double>(corr), x);
  for (int k = 0; k < cfg_.nu2; ++k) jacobi();
}

void ScalarMGHierarchy::solve(std::span<const double> b, std::span<double> x, int cycles) const {
  for (int c = 0; c < cycles; ++c) vcycle(num_levels() - 1, b, x);
}

}  // namespace stokeslab
