#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "stokeslab/block_vector.hpp"

namespace stokeslab {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LinearOperator = std::function<void(const BlockVector& x, BlockVector& y)>;
/// z = M^{-1} r. May change between calls (flexible variant).
using Preconditioner = std::function<void(const BlockVector& r, BlockVector& z)>;
/// Called with iteration 0 for the initial residual, then after every
/// iteration with the current relative residual estimate.
using IterationObserver = std::function<void(int iteration, double rel_residual)>;

struct FgmresConfig {
  int max_iters = 200;
  int restart = 0;  // 0: no restart
  double rel_tol = 1e-10;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  bool converged = false;
  /// Relative residual before the first iteration and after each one.
  std::vector<double> history;
  /// ||b - A x|| / ||b|| recomputed from scratch at exit.
  double final_rel_residual = 0.0;
  double solve_seconds = 0.0;
};

/// Right-preconditioned flexible GMRES with modified Gram-Schmidt and Givens
/// rotations. Convergence is judged on the unpreconditioned relative
/// residual; the true residual is recomputed before returning and another
/// cycle is started if it misses the tolerance while iterations remain.
SolveReport fgmres_solve(const LinearOperator& A, const BlockVector& b, BlockVector& x,
                         const FgmresConfig& cfg, const Preconditioner& M = {},
                         const IterationObserver& observer = {});

}  // namespace stokeslab
