#include "stokeslab/krylov.hpp"

#include <chrono>
#include <algorithm>
#include <cmath>
#include <string>

namespace stokeslab {

void FgmresConfig::validate() const {
  if (max_iters < 0) throw std::invalid_argument("solver.max_iters must be >= 0");
  if (restart < 0) throw std::invalid_argument("solver.restart must be >= 0");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("solver.tol must be > 0");
}

namespace {

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DivergenceError(std::string("FGMRES: non-finite ") + what);
}

}  // namespace

SolveReport fgmres_solve(const LinearOperator& A, const BlockVector& b, BlockVector& x,
                         const FgmresConfig& cfg, const Preconditioner& M,
                         const IterationObserver& observer) {
  cfg.validate();
  if (!b.same_shape(x)) throw std::invalid_argument("fgmres_solve: b and x differ in shape");
  const auto t0 = std::chrono::steady_clock::now();
  SolveReport rep;
  const double bnorm = norm2(b);
  check_finite(bnorm, "right-hand side");

  auto true_residual = [&]() {
    BlockVector ax(x.n_vel(), x.n_p());
    A(x, ax);
    return sub(b, ax);
  };

  if (bnorm == 0.0) {
    x.fill(0.0);
    rep.history.push_back(0.0);
    rep.converged = true;
    if (observer) observer(0, 0.0);
    return rep;
  }

  BlockVector r = true_residual();
  double beta = norm2(r);
  check_finite(beta, "initial residual");
  rep.history.push_back(beta / bnorm);
  if (observer) observer(0, beta / bnorm);

  while (true) {
    if (beta / bnorm <= cfg.rel_tol) {
      rep.converged = true;
      break;
    }
    const int remaining = cfg.max_iters - rep.iterations;
    if (remaining <= 0) break;
    const int m = cfg.restart > 0 ? std::min(cfg.restart, remaining) : remaining;

    std::vector<BlockVector> V;
    std::vector<BlockVector> Z;
    V.reserve(m + 1);
    Z.reserve(m);
    std::vector<std::vector<double>> H(m + 1, std::vector<double>(m, 0.0));
    std::vector<double> cs(m, 0.0), sn(m, 0.0), g(m + 1, 0.0);
    g[0] = beta;
    V.push_back(scale(1.0 / beta, r));

    int j = 0;
    bool breakdown = false;
    for (; j < m; ++j) {
      BlockVector z(x.n_vel(), x.n_p());
      if (M) M(V[j], z);
      else z = V[j];
      BlockVector w(x.n_vel(), x.n_p());
      A(z, w);
      Z.push_back(std::move(z));
      for (int i = 0; i <= j; ++i) {
        H[i][j] = dot(w, V[i]);
        axpy_inplace(-H[i][j], V[i], w);
      }
      const double hn = norm2(w);
      check_finite(hn, "Arnoldi norm");
      H[j + 1][j] = hn;
      for (int i = 0; i < j; ++i) {
        const double t = cs[i] * H[i][j] + sn[i] * H[i + 1][j];
        H[i + 1][j] = -sn[i] * H[i][j] + cs[i] * H[i + 1][j];
        H[i][j] = t;
      }
      const double den = std::hypot(H[j][j], H[j + 1][j]);
      if (den == 0.0) throw DivergenceError("FGMRES: singular Hessenberg column");
      cs[j] = H[j][j] / den;
      sn[j] = H[j + 1][j] / den;
      H[j][j] = den;
      H[j + 1][j] = 0.0;
      g[j + 1] = -sn[j] * g[j];
      g[j] = cs[j] * g[j];

      ++rep.iterations;
      const double rel = std::abs(g[j + 1]) / bnorm;
      check_finite(rel, "residual estimate");
      rep.history.push_back(rel);
      if (observer) observer(rep.iterations, rel);
      if (rel <= cfg.rel_tol) {
        ++j;
        break;
      }
      if (hn <= 1e-14 * std::abs(H[j][j])) {
        breakdown = true;
        ++j;
        break;
      }
      V.push_back(scale(1.0 / hn, w));
    }

    // Solve the j x j triangular system and update x with the Z basis.
    std::vector<double> y(j, 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[i];
      for (int k = i + 1; k < j; ++k) s -= H[i][k] * y[k];
      y[i] = s / H[i][i];
      check_finite(y[i], "least-squares solution");
    }
    for (int i = 0; i < j; ++i) axpy_inplace(y[i], Z[i], x);

    r = true_residual();
    beta = norm2(r);
    check_finite(beta, "true residual");
    if (beta / bnorm <= cfg.rel_tol) {
      rep.converged = true;
      break;
    }
    if (breakdown) break;
  }
  rep.final_rel_residual = beta / bnorm;
  rep.solve_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rep;
}

}  // namespace stokeslab
