#pragma once

// Independent reference constructions for the structured kernels: global
// sparse matrices assembled from closed-form 1D element matrices by
// tensor products, with Dirichlet elimination done on the sparse matrix.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <array>
#include <vector>

#include "stokeslab/block_vector.hpp"
#include "stokeslab/mesh.hpp"

namespace oracle {

using SpMat = Eigen::SparseMatrix<double>;
using Dense = Eigen::MatrixXd;

// Integrals of 1D shape-function products on one element [0, h].
// Quadratic shapes q0, q1 (midpoint), q2; linear shapes l0, l1.
inline Dense q2_stiffness_1d(double h) {
  Dense k(3, 3);
  k << 7, -8, 1, -8, 16, -8, 1, -8, 7;
  return k / (3.0 * h);
}

inline Dense q2_mass_1d(double h) {
  Dense m(3, 3);
  m << 4, 2, -1, 2, 16, 2, -1, 2, 4;
  return m * (h / 30.0);
}

inline Dense q1_mass_1d(double h) {
  Dense m(2, 2);
  m << 2, 1, 1, 2;
  return m * (h / 6.0);
}

// Simpson's rule is exact for the cubic products below.
template <typename F>
double simpson(F f, double h) {
  return h / 6.0 * (f(0.0) + 4.0 * f(0.5 * h) + f(h));
}

inline double q_shape(int k, double t) {
  if (k == 0) return (1.0 - t) * (1.0 - 2.0 * t);
  if (k == 1) return 4.0 * t * (1.0 - t);
  return t * (2.0 * t - 1.0);
}
inline double q_shape_d(int k, double t, double h) {
  if (k == 0) return (4.0 * t - 3.0) / h;
  if (k == 1) return (4.0 - 8.0 * t) / h;
  return (4.0 * t - 1.0) / h;
}
inline double l_shape(int k, double t) { return k == 0 ? 1.0 - t : t; }

// int l_k q_j and int l_k q_j' on one element.
inline Dense q1q2_mass_1d(double h) {
  Dense m(2, 3);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 3; ++j)
      m(k, j) = simpson([&](double x) { return l_shape(k, x / h) * q_shape(j, x / h); }, h);
  return m;
}
inline Dense q1q2_deriv_1d(double h) {
  Dense m(2, 3);
  for (int k = 0; k < 2; ++k)
    for (int j = 0; j < 3; ++j)
      m(k, j) = simpson([&](double x) { return l_shape(k, x / h) * q_shape_d(j, x / h, h); }, h);
  return m;
}

// Global 1D matrices on n elements: Q2 rows 0..2n, Q1 rows 0..n.
struct Global1D {
  Dense kq, mq, mp, mpq, gpq;
};

inline Global1D global_1d(int n) {
  const double h = 1.0 / n;
  Global1D g{Dense::Zero(2 * n + 1, 2 * n + 1), Dense::Zero(2 * n + 1, 2 * n + 1),
             Dense::Zero(n + 1, n + 1), Dense::Zero(n + 1, 2 * n + 1),
             Dense::Zero(n + 1, 2 * n + 1)};
  const Dense k = q2_stiffness_1d(h), m = q2_mass_1d(h), mp = q1_mass_1d(h);
  const Dense mpq = q1q2_mass_1d(h), gpq = q1q2_deriv_1d(h);
  for (int e = 0; e < n; ++e) {
    g.kq.block(2 * e, 2 * e, 3, 3) += k;
    g.mq.block(2 * e, 2 * e, 3, 3) += m;
    g.mp.block(e, e, 2, 2) += mp;
    g.mpq.block(e, 2 * e, 2, 3) += mpq;
    g.gpq.block(e, 2 * e, 2, 3) += gpq;
  }
  return g;
}

struct Monolithic {
  SpMat A;  // full saddle-point matrix in BlockVector ordering
  SpMat M;  // pressure mass matrix
};

// Raw (no boundary conditions) Stokes matrix.
inline Monolithic raw_stokes(int n, double nu) {
  const auto g = global_1d(n);
  const int d = 2 * n + 1;
  const int np = n + 1;
  const int nv = d * d;
  std::vector<Eigen::Triplet<double>> t, tm;
  auto emit = [&](int r, int c, double v) {
    if (v != 0.0) t.emplace_back(r, c, v);
  };
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a)
      for (int bb = 0; bb < d; ++bb)
        for (int aa = 0; aa < d; ++aa) {
          const double v = nu * (g.kq(a, aa) * g.mq(b, bb) + g.mq(a, aa) * g.kq(b, bb));
          emit(b * d + a, bb * d + aa, v);
          emit(nv + b * d + a, nv + bb * d + aa, v);
        }
  for (int pj = 0; pj < np; ++pj)
    for (int pi = 0; pi < np; ++pi) {
      const int r = 2 * nv + pj * np + pi;
      for (int b = 0; b < d; ++b)
        for (int a = 0; a < d; ++a) {
          const double bx = -g.gpq(pi, a) * g.mpq(pj, b);
          const double by = -g.mpq(pi, a) * g.gpq(pj, b);
          emit(r, b * d + a, bx);
          emit(b * d + a, r, bx);
          emit(r, nv + b * d + a, by);
          emit(nv + b * d + a, r, by);
        }
      for (int qj = 0; qj < np; ++qj)
        for (int qi = 0; qi < np; ++qi) {
          const double v = g.mp(pi, qi) * g.mp(pj, qj);
          if (v != 0.0) tm.emplace_back(pj * np + pi, qj * np + qi, v);
        }
    }
  Monolithic out{SpMat(2 * nv + np * np, 2 * nv + np * np), SpMat(np * np, np * np)};
  out.A.setFromTriplets(t.begin(), t.end());
  out.M.setFromTriplets(tm.begin(), tm.end());
  return out;
}

// Indices of Dirichlet rows (both velocity components).
inline std::vector<bool> dirichlet_flags(int n) {
  const int d = 2 * n + 1;
  const int nv = d * d;
  std::vector<bool> f(2 * nv + (n + 1) * (n + 1), false);
  for (int b = 0; b < d; ++b)
    for (int a = 0; a < d; ++a)
      if (a == 0 || b == 0 || a == d - 1 || b == d - 1) f[b * d + a] = f[nv + b * d + a] = true;
  return f;
}

// Identity rows on Dirichlet DOFs, Dirichlet columns removed elsewhere.
inline SpMat eliminate(const SpMat& raw, const std::vector<bool>& dir) {
  std::vector<Eigen::Triplet<double>> t;
  for (int c = 0; c < raw.outerSize(); ++c)
    for (SpMat::InnerIterator it(raw, c); it; ++it)
      if (!dir[it.row()] && !dir[it.col()]) t.emplace_back(it.row(), it.col(), it.value());
  for (std::size_t k = 0; k < dir.size(); ++k)
    if (dir[k]) t.emplace_back(k, k, 1.0);
  SpMat out(raw.rows(), raw.cols());
  out.setFromTriplets(t.begin(), t.end());
  return out;
}

inline Eigen::VectorXd to_eigen(const stokeslab::BlockVector& v) {
  Eigen::VectorXd e(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) e[k] = v[k];
  return e;
}

inline stokeslab::BlockVector from_eigen(const Eigen::VectorXd& e, const stokeslab::StructuredGrid& g) {
  stokeslab::BlockVector v(g);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = e[k];
  return v;
}

// Dense Dirichlet-eliminated saddle-point matrix.
inline Eigen::MatrixXd dense_stokes(int n, double nu) {
  return Eigen::MatrixXd(eliminate(raw_stokes(n, nu).A, dirichlet_flags(n)));
}

// Solves a singular saddle-point system whose only nullspace is the
// constant pressure by bordering with the pressure-constant indicator.
inline Eigen::VectorXd solve_mean_free(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                       Eigen::Index p0) {
  const Eigen::Index s = a.rows();
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(s + 1, s + 1);
  k.topLeftCorner(s, s) = a;
  for (Eigen::Index i = p0; i < s; ++i) k(i, s) = k(s, i) = 1.0;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(s + 1);
  rhs.head(s) = b;
  return k.fullPivLu().solve(rhs).head(s);
}

}  // namespace oracle
