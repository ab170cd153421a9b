#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "stokeslab/assembly.hpp"
#include "stokeslab/block_vector.hpp"

namespace stokeslab {

class SingularDiagonalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A relaxation scheme bound to the operators of one level. The correction
/// is linear in the residual.
class Relaxation {
 public:
  virtual ~Relaxation() = default;

  /// delta = K r for the residual r = (r_u, r_p).
  virtual void correction(const BlockVector& r, BlockVector& delta) const = 0;
  virtual std::string_view name() const = 0;

  /// One sweep: x <- x + K (b - A x).
  void smooth(const BlockVector& b, BlockVector& x) const;

  const StokesOperators& operators() const { return *ops_; }

 protected:
  explicit Relaxation(const StokesOperators& ops) : ops_(&ops) {}

 private:
  const StokesOperators* ops_;
};

/// S = -(1/t) B D^{-1} B^T applied matrix-free, with D = diag(L).
class SchurOperator {
 public:
  SchurOperator(const StokesOperators& ops, double t);

  double t() const { return t_; }
  std::size_t size() const { return diag_.size(); }
  const StokesOperators& operators() const { return *ops_; }

  void apply(std::span<const double> p, std::span<double> out) const;
  /// Exact diag(S), precomputed from the stencils.
  const std::vector<double>& diagonal() const { return diag_; }
  /// D^{-1} / t on one velocity component.
  const std::vector<double>& scaled_inverse_diagonal() const { return dinv_t_; }

 private:
  const StokesOperators* ops_;
  double t_;
  std::vector<double> dinv_t_;
  std::vector<double> diag_;
};

/// sweeps repetitions of dp <- dp + omega diag(S)^{-1} (rhs - S dp).
void weighted_jacobi_pressure(const SchurOperator& s, std::span<const double> rhs,
                              std::span<double> dp, double omega, int sweeps);

/// Approximate solver for S dp = rhs, dp initially zero.
using SchurSolver =
    std::function<void(const SchurOperator&, std::span<const double> rhs, std::span<double> dp)>;

struct BSConfig {
  double t = 1.0;
  double omega = 1.0;
  double jacobi_omega = 0.8;
  int jacobi_sweeps = 2;

  void validate() const;
};

struct UzawaConfig {
  double t = 1.0;
  double jacobi_omega = 0.4;
  int jacobi_sweeps = 1;

  void validate() const;
};

/// Braess-Sarazin: solve [tD B^T; B 0] delta = r with the Schur system done
/// by weighted Jacobi, then damp by omega.
class BraessSarazin final : public Relaxation {
 public:
  BraessSarazin(const StokesOperators& ops, const BSConfig& cfg, SchurSolver solver = {});

  void correction(const BlockVector& r, BlockVector& delta) const override;
  std::string_view name() const override { return "bs"; }
  const SchurOperator& schur() const { return schur_; }
  const BSConfig& config() const { return cfg_; }

 private:
  BSConfig cfg_;
  SchurOperator schur_;
  SchurSolver solver_;
};

/// Schur-Uzawa: block lower-triangular solve [tD 0; B S] delta = r.
class SchurUzawa final : public Relaxation {
 public:
  SchurUzawa(const StokesOperators& ops, const UzawaConfig& cfg, SchurSolver solver = {});

  void correction(const BlockVector& r, BlockVector& delta) const override;
  std::string_view name() const override { return "uzawa"; }
  const SchurOperator& schur() const { return schur_; }

 private:
  UzawaConfig cfg_;
  SchurOperator schur_;
  SchurSolver solver_;
};

BlockVector braess_sarazin_sweep(const StokesOperators& ops, const BlockVector& r,
                                 const BSConfig& cfg);
BlockVector schur_uzawa_sweep(const StokesOperators& ops, const BlockVector& r,
                              const UzawaConfig& cfg);

}  // namespace stokeslab
