#pragma once

#include <functional>
#include <optional>
#include <span>

#include "stokeslab/assembly.hpp"
#include "stokeslab/block_vector.hpp"
#include "stokeslab/mg.hpp"

namespace stokeslab {

struct BlockTriConfig {
  int cycles = 3;
  double omega_p = 0.6;
  double omega_u = 1.0;
  int nu1 = 3;
  int nu2 = 3;
  int coarsest_n = 4;

  void validate() const;
};

/// Upper block-triangular preconditioner [L B^T; 0 -M/nu]^{-1}: first
/// (1/nu) M dp = -r_p, then L du = r_u - B^T dp per velocity component.
class BlockTriangular {
 public:
  /// Approximate scalar solve x ~ K^{-1} rhs, x initially zero.
  using ScalarSolve = std::function<void(std::span<const double> rhs, std::span<double> x)>;

  /// Inner solves by scalar multigrid on the hierarchy below ops.grid.
  BlockTriangular(const StokesOperators& ops, const BlockTriConfig& cfg);
  /// Caller-supplied inner solves for the mass and Laplacian blocks.
  BlockTriangular(const StokesOperators& ops, ScalarSolve mass_solve, ScalarSolve laplace_solve);

  /// z = P^{-1} r. The pressure mean of z is removed.
  void apply(const BlockVector& r, BlockVector& z) const;
  const StokesOperators& operators() const { return *ops_; }

 private:
  const StokesOperators* ops_;
  BlockTriConfig cfg_;
  std::optional<ScalarMGHierarchy> mass_mg_;
  std::optional<ScalarMGHierarchy> lap_mg_;
  ScalarSolve mass_solve_;
  ScalarSolve laplace_solve_;
};

BlockVector block_tri_apply(const BlockTriangular& pc, const BlockVector& r);

}  // namespace stokeslab
