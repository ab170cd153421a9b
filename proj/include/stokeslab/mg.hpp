#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stokeslab/assembly.hpp"
#include "stokeslab/relaxation.hpp"
#include "stokeslab/transfer.hpp"
#include "stokeslab/vanka.hpp"

namespace stokeslab {

enum class RelaxationKind { BS, Vanka, VankaSimple, Uzawa };
enum class CoarseSolverKind { LU, Sweeps };

const char* to_string(RelaxationKind k);
RelaxationKind parse_relaxation(const std::string& s);

struct MGConfig {
  int nu1 = 1;
  int nu2 = 1;
  int coarsest_n = 4;
  CoarseSolverKind coarse_solver = CoarseSolverKind::LU;
  int coarse_sweeps = 3;
  RelaxationKind relaxation = RelaxationKind::BS;
  BSConfig bs;
  UzawaConfig uzawa;
  VankaConfig vanka;

  void validate(int n_fine) const;
};

/// Number of levels for n_fine = coarsest_n * 2^k, or throws.
int level_count(int n_fine, int coarsest_n);

std::unique_ptr<Relaxation> make_relaxation(const StokesOperators& ops, const MGConfig& cfg);

/// Dense LU of A + z z^T with z the constant-pressure indicator. For
/// compatible right-hand sides this returns the mean-free solution of A x = b.
class CoarseDirectSolver {
 public:
  explicit CoarseDirectSolver(const StokesOperators& ops);
  void solve(const BlockVector& b, BlockVector& x) const;
  std::size_t size() const { return static_cast<std::size_t>(lu_.rows()); }

 private:
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
};

/// Monolithic multigrid hierarchy over rediscretized Stokes operators.
/// Level 0 is the coarsest; interpolation[l] maps level l to level l+1.
class MGHierarchy {
 public:
  MGHierarchy(const StructuredGrid& fine, double nu, const MGConfig& cfg);

  int num_levels() const { return static_cast<int>(ops_.size()); }
  int finest() const { return num_levels() - 1; }
  const StokesOperators& operators(int l) const { return *ops_.at(l); }
  const Relaxation& relaxation(int l) const { return *relax_.at(l); }
  const Interpolation& interpolation(int l) const { return *interp_.at(l); }
  const MGConfig& config() const { return cfg_; }

  /// One V(nu1, nu2) cycle on level l improving x in place.
  void vcycle(int l, const BlockVector& b, BlockVector& x) const;
  void coarse_solve(const BlockVector& b, BlockVector& x) const;
  /// Preconditioner action: one cycle from zero on the finest level, then
  /// the pressure mean is removed.
  void apply(const BlockVector& r, BlockVector& z) const;
  /// Relaxation sweeps performed by the last coarse_solve in sweep mode.
  int last_coarse_sweeps() const { return last_coarse_sweeps_; }

 private:
  MGConfig cfg_;
  std::vector<std::unique_ptr<StokesOperators>> ops_;
  std::vector<std::unique_ptr<Relaxation>> relax_;
  std::vector<std::unique_ptr<Interpolation>> interp_;
  std::optional<CoarseDirectSolver> coarse_;
  mutable int last_coarse_sweeps_ = 0;
};

struct ScalarMGConfig {
  int nu1 = 3;
  int nu2 = 3;
  double omega = 1.0;
  int coarsest_n = 4;
};

/// Multigrid for a single scalar operator with weighted Jacobi relaxation:
/// the velocity Laplacian block L (Dirichlet rows identity) or the pressure
/// mass matrix scaled by 1/nu.
class ScalarMGHierarchy {
 public:
  static ScalarMGHierarchy velocity_laplacian(const StructuredGrid& fine, double nu,
                                              const ScalarMGConfig& cfg);
  static ScalarMGHierarchy pressure_mass(const StructuredGrid& fine, double nu,
                                         const ScalarMGConfig& cfg);

  int num_levels() const { return static_cast<int>(levels_.size()); }
  std::size_t size(int l) const;
  void apply_operator(int l, std::span<const double> x, std::span<double> y) const;
  void vcycle(int l, std::span<const double> b, std::span<double> x) const;
  /// cycles V-cycles on the finest level starting from x.
  void solve(std::span<const double> b, std::span<double> x, int cycles) const;
  const ScalarMGConfig& config() const { return cfg_; }

 private:
  struct Level {
    StructuredGrid grid;
    std::optional<StencilQ2Q2> L;
    std::optional<StencilQ1Q1> M;
    std::vector<double> inv_diag;
    std::unique_ptr<Interpolation> to_finer;
  };

  ScalarMGHierarchy() = default;
  void finalize();

  ScalarMGConfig cfg_;
  std::vector<Level> levels_;
  Eigen::PartialPivLU<Eigen::MatrixXd> coarse_lu_;
};

}  // namespace stokeslab
